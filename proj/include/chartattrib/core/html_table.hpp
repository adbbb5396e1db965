#pragma once

#include <string>

#include "chartattrib/core/types.hpp"

namespace chartattrib::core {

/// Parses a single-table HTML fragment: header row first (corner cell
/// ignored), row-header first column. Throws MalformedHtml / RaggedRows.
DataTable parse_table_html(const std::string& html);

/// Canonical fragment; parse_table_html(serialize_table_html(t)) == t.
std::string serialize_table_html(const DataTable& table);

}  // namespace chartattrib::core
