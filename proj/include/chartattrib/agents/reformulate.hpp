#pragma once

#include <string>
#include <vector>

#include "chartattrib/core/types.hpp"
#include "chartattrib/llm/gateway.hpp"

namespace chartattrib::agents {

struct ClaimSet {
  std::vector<core::Claim> claims;  // indices 0..n-1, texts distinct
  std::string source_answer;
};

/// Splits an answer into independent single-fact claims. Empty model output
/// falls back to one claim holding the whole answer; duplicates keep their
/// first occurrence.
ClaimSet decompose_answer(llm::Gateway& gateway, llm::Backend& backend,
                          const std::string& question, const std::string& answer);

}  // namespace chartattrib::agents
