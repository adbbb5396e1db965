#pragma once

#include <string>
#include <vector>

#include "chartattrib/core/types.hpp"
#include "chartattrib/llm/gateway.hpp"

namespace chartattrib::agents {

/// Row/column/cell descriptions, dimensioned exactly like the table.
struct CaptionSet {
  std::vector<std::string> row_captions;
  std::vector<std::string> col_captions;
  std::vector<std::vector<std::string>> cell_captions;
};

struct CaptionOptions {
  int parallelism = 4;
};

/// Per-entity captioning. A failed or empty model response for an entity
/// degrades to a deterministic template built from table content, so the
/// retrieval stage never sees a missing caption.
std::vector<std::string> caption_rows(llm::Gateway& gateway, llm::Backend& backend,
                                      const core::DataTable& table,
                                      const CaptionOptions& opts = {});
std::vector<std::string> caption_columns(llm::Gateway& gateway, llm::Backend& backend,
                                         const core::DataTable& table,
                                         const CaptionOptions& opts = {});
std::vector<std::vector<std::string>> caption_cells(
    llm::Gateway& gateway, llm::Backend& backend, const core::DataTable& table,
    const std::vector<std::string>& row_captions,
    const std::vector<std::string>& col_captions, const CaptionOptions& opts = {});

CaptionSet caption_table(llm::Gateway& gateway, llm::Backend& backend,
                         const core::DataTable& table, const CaptionOptions& opts = {});

/// Deterministic fallbacks (also used when the backend fails outright).
std::string fallback_row_caption(const core::DataTable& table, size_t row);
std::string fallback_col_caption(const core::DataTable& table, size_t col);
std::string fallback_cell_caption(const core::DataTable& table, size_t row, size_t col);

}  // namespace chartattrib::agents
