#include "chartattrib/agents/retrieval.hpp"

#include <algorithm>

#include "chartattrib/core/errors.hpp"
#include "chartattrib/prompts/catalog.hpp"
#include "chartattrib/util/parallel.hpp"

namespace chartattrib::agents {

std::pair<std::set<int>, std::set<int>> retained_sets(
    const std::vector<RelevanceJudgment>& judgments, double threshold) {
  std::set<int> rows, cols;
  for (const auto& j : judgments) {
    if (j.score < threshold) continue;
    if (j.target == RelevanceJudgment::Target::row) {
      rows.insert(j.index);
    } else {
      cols.insert(j.index);
    }
  }
  return {std::move(rows), std::move(cols)};
}

PrefilterResult prefilter(llm::Gateway& gateway, llm::Backend& backend,
                          const core::DataTable& table, const CaptionSet& captions,
                          const core::Claim& claim, double threshold, int parallelism) {
  if (threshold < 0 || threshold > 1) throw Error("prefilter threshold must be in [0,1]");
  size_t rows = table.rows(), cols = table.cols();
  std::vector<RelevanceJudgment> judgments(rows + cols);
  nlohmann::json schema = {{"type", "object"},
                           {"required", {"score"}},
                           {"properties",
                            {{"score", {{"type", "number"}}},
                             {"rationale", {{"type", "string"}}}}}};

  util::parallel_for(rows + cols, size_t(std::max(1, parallelism)), [&](size_t i) {
    bool is_row = i < rows;
    size_t index = is_row ? i : i - rows;
    const auto& tpl = prompts::get(is_row ? "prefilter.row" : "prefilter.col");
    std::map<std::string, std::string> vars = {{"claim", claim.text}};
    if (is_row) {
      vars["row_index"] = std::to_string(index);
      vars["row_header"] = table.row_headers()[index];
      vars["caption"] = captions.row_captions[index];
    } else {
      vars["col_index"] = std::to_string(index);
      vars["col_header"] = table.column_headers()[index];
      vars["caption"] = captions.col_captions[index];
    }
    llm::Prompt prompt =
        llm::make_prompt(tpl.system, {llm::TextPart{prompts::render(tpl.user, vars)}});
    nlohmann::json v = gateway.complete_structured(backend, prompt, schema);
    RelevanceJudgment j;
    j.target = is_row ? RelevanceJudgment::Target::row : RelevanceJudgment::Target::column;
    j.index = int(index);
    j.score = std::clamp(v.at("score").get<double>(), 0.0, 1.0);
    j.rationale = v.value("rationale", "");
    judgments[i] = std::move(j);
  });

  PrefilterResult out;
  out.judgments = std::move(judgments);
  out.threshold = threshold;
  auto [r, c] = retained_sets(out.judgments, threshold);
  out.retained_rows = std::move(r);
  out.retained_cols = std::move(c);
  return out;
}

std::vector<core::CellRef> candidate_cells(const PrefilterResult& pref,
                                           const core::DataTable& table) {
  auto all_rows = [&] {
    std::set<int> s;
    for (int r = 0; r < int(table.rows()); ++r) s.insert(r);
    return s;
  };
  auto all_cols = [&] {
    std::set<int> s;
    for (int c = 0; c < int(table.cols()); ++c) s.insert(c);
    return s;
  };
  std::set<int> rows = pref.retained_rows.empty() ? all_rows() : pref.retained_rows;
  std::set<int> cols = pref.retained_cols.empty() ? all_cols() : pref.retained_cols;
  std::vector<core::CellRef> out;
  out.reserve(rows.size() * cols.size());
  for (int r : rows) {
    for (int c : cols) out.push_back({r, c});
  }
  return out;
}

namespace {

// Applies a model-returned permutation (1-based candidate numbers) to a
// window: duplicates and out-of-range numbers are dropped, missing
// positions follow the returned ones in original order.
std::vector<int> repair_permutation(const std::vector<int>& returned, int count) {
  std::vector<int> order;
  std::vector<bool> used(count, false);
  for (int n : returned) {
    if (n < 1 || n > count || used[n - 1]) continue;
    used[n - 1] = true;
    order.push_back(n - 1);
  }
  for (int i = 0; i < count; ++i) {
    if (!used[i]) order.push_back(i);
  }
  return order;
}

std::string candidate_listing(const std::vector<core::CellRef>& cells,
                              const std::vector<std::vector<std::string>>& cell_captions) {
  std::string out;
  for (size_t i = 0; i < cells.size(); ++i) {
    const auto& cell = cells[i];
    std::string caption;
    if (cell.row >= 0 && size_t(cell.row) < cell_captions.size() && cell.col >= 0 &&
        size_t(cell.col) < cell_captions[cell.row].size()) {
      caption = cell_captions[cell.row][cell.col];
    }
    out += std::to_string(i + 1) + ". cell (" + std::to_string(cell.row) + ", " +
           std::to_string(cell.col) + "): " + caption + "\n";
  }
  return out;
}

// One listwise call over a window of candidates; returns the window's new order.
std::vector<int> rank_window(llm::Gateway& gateway, llm::Backend& backend,
                             const std::vector<core::CellRef>& window_cells,
                             const std::vector<std::vector<std::string>>& cell_captions,
                             const core::Claim& claim, std::string* rationale_out) {
  const auto& tpl = prompts::get("rerank");
  std::string user = prompts::render(
      tpl.user,
      {{"claim", claim.text}, {"candidates", candidate_listing(window_cells, cell_captions)}});
  llm::Prompt prompt = llm::make_prompt(tpl.system, {llm::TextPart{user}});
  nlohmann::json schema = {{"type", "object"},
                           {"required", {"ranking"}},
                           {"properties",
                            {{"ranking", {{"type", "array"}, {"items", {{"type", "integer"}}}}},
                             {"rationale", {{"type", "string"}}}}}};
  nlohmann::json v = gateway.complete_structured(backend, prompt, schema);
  if (rationale_out) *rationale_out = v.value("rationale", "");
  std::vector<int> returned;
  for (const auto& n : v.at("ranking")) returned.push_back(n.get<int>());
  return repair_permutation(returned, int(window_cells.size()));
}

}  // namespace

Ranking rerank(llm::Gateway& gateway, llm::Backend& backend,
               const std::vector<core::CellRef>& candidates,
               const std::vector<std::vector<std::string>>& cell_captions,
               const core::Claim& claim, int top_k, int window, int stride) {
  if (candidates.empty()) throw Error("rerank needs at least one candidate");
  if (top_k < 1) throw Error("top_k must be >= 1");
  if (window < 2 || stride < 1 || stride > window) {
    throw Error("rerank needs window >= 2 and 1 <= stride <= window");
  }

  Ranking out;
  std::vector<core::CellRef> working = candidates;
  if (int(working.size()) == 1) {
    out.ordered = working;
    out.rationale = "single candidate";
    return out;
  }

  if (int(working.size()) <= window) {
    std::string rationale;
    auto order = rank_window(gateway, backend, working, cell_captions, claim, &rationale);
    std::vector<core::CellRef> ranked;
    for (int idx : order) ranked.push_back(working[idx]);
    out.ordered = std::move(ranked);
    out.rationale = rationale;
  } else {
    // Sliding windows from the tail; each pass reorders its span in place
    // so earlier (front) windows see the bubbled-up winners.
    std::string rationale;
    int start = int(working.size()) - window;
    for (;;) {
      std::vector<core::CellRef> span(working.begin() + start,
                                      working.begin() + start + window);
      std::string window_rationale;
      auto order = rank_window(gateway, backend, span, cell_captions, claim,
                               &window_rationale);
      for (int i = 0; i < window; ++i) working[start + i] = span[order[i]];
      rationale = window_rationale;  // front-most window explains the final order
      if (start == 0) break;
      start = std::max(0, start - stride);
    }
    out.ordered = std::move(working);
    out.rationale = rationale;
  }

  if (int(out.ordered.size()) > top_k) out.ordered.resize(top_k);
  return out;
}

RetrievalTrace retrieve_citation_cells(llm::Gateway& gateway, llm::Backend& backend,
                                       const core::DataTable& table,
                                       const CaptionSet& captions, const core::Claim& claim,
                                       const RetrievalConfig& cfg) {
  RetrievalTrace trace;
  trace.prefilter =
      prefilter(gateway, backend, table, captions, claim, cfg.threshold, cfg.parallelism);
  trace.candidates = candidate_cells(trace.prefilter, table);
  trace.ranking = rerank(gateway, backend, trace.candidates, captions.cell_captions, claim,
                         cfg.top_k, cfg.rerank_window, cfg.rerank_stride);
  trace.cited = trace.ranking.ordered;
  return trace;
}

nlohmann::json RetrievalTrace::to_json(const core::Claim& claim) const {
  nlohmann::json judgments = nlohmann::json::array();
  for (const auto& j : prefilter.judgments) {
    judgments.push_back(
        {{"target", j.target == RelevanceJudgment::Target::row ? "row" : "col"},
         {"index", j.index},
         {"score", j.score},
         {"rationale", j.rationale}});
  }
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : candidates) cands.push_back({c.row, c.col});
  nlohmann::json final_order = nlohmann::json::array();
  for (const auto& c : cited) final_order.push_back({c.row, c.col});
  return {{"claim_index", claim.index},
          {"claim_text", claim.text},
          {"judgments", std::move(judgments)},
          {"retained_rows", prefilter.retained_rows},
          {"retained_cols", prefilter.retained_cols},
          {"threshold", prefilter.threshold},
          {"candidates", std::move(cands)},
          {"final", std::move(final_order)},
          {"rationale", ranking.rationale}};
}

}  // namespace chartattrib::agents
