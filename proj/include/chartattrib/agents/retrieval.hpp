#pragma once

#include <set>
#include <string>
#include <vector>

#include "chartattrib/agents/captioning.hpp"
#include "chartattrib/core/types.hpp"
#include "chartattrib/llm/gateway.hpp"

namespace chartattrib::agents {

struct RelevanceJudgment {
  enum class Target { row, column };
  Target target = Target::row;
  int index = 0;
  double score = 0;  // clamped to [0,1]
  std::string rationale;
};

struct PrefilterResult {
  std::set<int> retained_rows;
  std::set<int> retained_cols;
  std::vector<RelevanceJudgment> judgments;
  double threshold = 0.4;
};

struct Ranking {
  std::vector<core::CellRef> ordered;  // best first, duplicate-free
  std::string rationale;
};

struct RetrievalConfig {
  double threshold = 0.4;
  int top_k = 3;
  int parallelism = 4;
  int rerank_window = 20;
  int rerank_stride = 10;
};

struct RetrievalTrace {
  PrefilterResult prefilter;
  std::vector<core::CellRef> candidates;
  Ranking ranking;
  std::vector<core::CellRef> cited;

  nlohmann::json to_json(const core::Claim& claim) const;
};

/// Retention rule shared by prefilter and the monotonicity property:
/// keep exactly the targets whose score >= threshold.
std::pair<std::set<int>, std::set<int>> retained_sets(
    const std::vector<RelevanceJudgment>& judgments, double threshold);

/// One structured scoring call per row and per column.
PrefilterResult prefilter(llm::Gateway& gateway, llm::Backend& backend,
                          const core::DataTable& table, const CaptionSet& captions,
                          const core::Claim& claim, double threshold, int parallelism = 4);

/// Cartesian product of retained rows x columns in row-major order, with
/// graceful fallbacks when either side is empty.
std::vector<core::CellRef> candidate_cells(const PrefilterResult& pref,
                                           const core::DataTable& table);

/// Listwise re-ranking over sliding windows (windows walk from the tail so
/// winners bubble toward the front). The returned order is duplicate-free,
/// drawn from the candidates, truncated to top_k with missing candidates
/// appended in original order first.
Ranking rerank(llm::Gateway& gateway, llm::Backend& backend,
               const std::vector<core::CellRef>& candidates,
               const std::vector<std::vector<std::string>>& cell_captions,
               const core::Claim& claim, int top_k, int window = 20, int stride = 10);

/// prefilter -> candidate_cells -> rerank -> first top_k cells.
RetrievalTrace retrieve_citation_cells(llm::Gateway& gateway, llm::Backend& backend,
                                       const core::DataTable& table,
                                       const CaptionSet& captions, const core::Claim& claim,
                                       const RetrievalConfig& cfg);

}  // namespace chartattrib::agents
