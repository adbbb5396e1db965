#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace chartattrib::llm {

/// Validates a value against the schema subset the agents use: type,
/// properties, required, items, enum, minimum/maximum, minItems.
/// Returns an error message, or nullopt when valid.
std::optional<std::string> validate_schema(const nlohmann::json& value,
                                           const nlohmann::json& schema);

/// Pulls the first JSON value out of raw model text: direct parse, then
/// fenced ```json blocks, then the first balanced {...} or [...] span.
/// Returns nullopt when nothing parses.
std::optional<nlohmann::json> extract_json(const std::string& raw);

}  // namespace chartattrib::llm
