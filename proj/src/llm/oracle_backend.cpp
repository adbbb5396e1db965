#include "chartattrib/llm/oracle_backend.hpp"

#include <algorithm>
#include <mutex>
#include <vector>

#include <nlohmann/json.hpp>

#include "chartattrib/agents/localization.hpp"
#include "chartattrib/core/errors.hpp"
#include "chartattrib/core/html_table.hpp"
#include "chartattrib/pipeline/sample.hpp"
#include "chartattrib/util/fsio.hpp"
#include "chartattrib/util/hash.hpp"

namespace chartattrib::llm {

namespace fs = std::filesystem;

namespace {

// Value of the first "<label>value" line in the rendered prompt.
std::string line_value(const std::string& text, const std::string& label) {
  size_t pos = text.find(label);
  if (pos == std::string::npos) return "";
  pos += label.size();
  size_t end = text.find('\n', pos);
  return text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
}

// Last occurrence: the reformulate prompt carries few-shot "Answer:" lines
// before the real one.
std::string last_line_value(const std::string& text, const std::string& label) {
  size_t pos = text.rfind(label);
  if (pos == std::string::npos) return "";
  pos += label.size();
  size_t end = text.find('\n', pos);
  return text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
}

// All "(r, c)" pairs following the given label, one per line.
std::vector<core::CellRef> parse_cells(const std::string& text, const std::string& prefix) {
  std::vector<core::CellRef> out;
  size_t pos = 0;
  while ((pos = text.find(prefix, pos)) != std::string::npos) {
    pos += prefix.size();
    size_t comma = text.find(',', pos);
    size_t close = text.find(')', pos);
    if (comma == std::string::npos || close == std::string::npos || comma > close) continue;
    try {
      int row = std::stoi(text.substr(pos, comma - pos));
      int col = std::stoi(text.substr(comma + 1, close - comma - 1));
      out.push_back({row, col});
    } catch (const std::exception&) {
    }
  }
  return out;
}

struct IndexedSample {
  pipeline::AttributionSample sample;
  chartgen::GroundTruth gt;
  std::vector<agents::DataMark> marks;  // ordered, numbered
};

}  // namespace

struct OracleBackend::Impl {
  fs::path dir;
  int mislocalize_every = 0;
  std::vector<IndexedSample> samples;
  std::map<std::string, size_t> by_image_hash;
  std::map<std::string, size_t> by_answer;
  std::atomic<long> mapping_counter{0};

  const IndexedSample* by_hash(const std::string& rendered) const {
    // The target chart is the last image part (exemplars precede it).
    const std::string tag = "[image sha256=";
    size_t pos = rendered.rfind(tag);
    if (pos == std::string::npos) return nullptr;
    size_t end = rendered.find(']', pos);
    if (end == std::string::npos) return nullptr;
    std::string hash = rendered.substr(pos + tag.size(), end - pos - tag.size());
    auto it = by_image_hash.find(hash);
    return it == by_image_hash.end() ? nullptr : &samples[it->second];
  }

  const IndexedSample* by_claim(const std::string& rendered) const {
    std::string claim = line_value(rendered, "Claim: ");
    auto it = by_answer.find(claim);
    return it == by_answer.end() ? nullptr : &samples[it->second];
  }
};

OracleBackend::OracleBackend(const fs::path& samples_dir, int mislocalize_every)
    : impl_(std::make_unique<Impl>()) {
  impl_->dir = samples_dir;
  impl_->mislocalize_every = mislocalize_every;
  if (!fs::is_directory(samples_dir)) {
    throw ConfigError("oracle backend: not a directory: " + samples_dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(samples_dir)) {
    if (entry.path().filename().string().ends_with(".sample.json")) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    IndexedSample idx{pipeline::load_sample(path), {}, {}};
    idx.gt = idx.sample.load_ground_truth();
    idx.marks = agents::oracle_marks_from_ground_truth(idx.gt);
    std::string image_hash = util::sha256_hex(util::read_file(idx.sample.image_path));
    size_t slot = impl_->samples.size();
    impl_->samples.push_back(std::move(idx));
    impl_->by_image_hash[image_hash] = slot;
    impl_->by_answer[impl_->samples[slot].sample.answer] = slot;
  }
  if (impl_->samples.empty()) {
    throw ConfigError("oracle backend: no *.sample.json under " + samples_dir.string());
  }
}

OracleBackend::~OracleBackend() = default;

std::string OracleBackend::identity() const {
  return impl_->mislocalize_every > 0
             ? "oracle~mislocalize" + std::to_string(impl_->mislocalize_every)
             : "oracle";
}

std::string OracleBackend::complete_raw(const Prompt& prompt) {
  const std::string rendered = prompt.rendered();
  std::string task = line_value(rendered, "TASK: ");

  if (task == "extract-table" || task == "refine-extraction") {
    const IndexedSample* s = impl_->by_hash(rendered);
    if (!s) throw MockMiss("oracle: unknown chart image in extraction prompt");
    if (!s->sample.table) throw MockMiss("oracle: sample has no source table");
    return core::serialize_table_html(*s->sample.table);
  }

  if (task == "verify-extraction" || task == "verify-citation") {
    return R"({"consistent": true, "discrepancies": []})";
  }

  if (task == "reformulate-answer") {
    std::string answer = last_line_value(rendered, "Answer: ");
    nlohmann::json j = {{"claims", {answer}}};
    return j.dump();
  }

  if (task == "caption-row" || task == "caption-column" || task == "caption-cell") {
    return R"({"caption": "oracle caption"})";
  }

  if (task == "prefilter-row" || task == "prefilter-column") {
    const IndexedSample* s = impl_->by_claim(rendered);
    if (!s) throw MockMiss("oracle: unknown claim in prefilter prompt");
    bool is_row = task == "prefilter-row";
    std::string value =
        is_row ? line_value(rendered, "\nRow ") : line_value(rendered, "\nColumn ");
    int index = -1;
    try {
      index = std::stoi(value);  // "N header: ..."
    } catch (const std::exception&) {
      throw MockMiss("oracle: prefilter prompt has no target index");
    }
    bool relevant = false;
    for (const auto& cell : s->sample.gt_cells) {
      if ((is_row ? cell.row : cell.col) == index) relevant = true;
    }
    nlohmann::json j = {{"score", relevant ? 1.0 : 0.0},
                        {"rationale", relevant ? "holds the supporting value"
                                               : "unrelated to the claim"}};
    return j.dump();
  }

  if (task == "rerank-cells") {
    const IndexedSample* s = impl_->by_claim(rendered);
    if (!s) throw MockMiss("oracle: unknown claim in rerank prompt");
    std::vector<core::CellRef> candidates = parse_cells(rendered, ". cell (");
    std::vector<int> ranking;
    for (size_t i = 0; i < candidates.size(); ++i) {
      for (const auto& cell : s->sample.gt_cells) {
        if (candidates[i] == cell) {
          ranking.push_back(int(i) + 1);
          break;
        }
      }
    }
    for (size_t i = 0; i < candidates.size(); ++i) {
      if (std::find(ranking.begin(), ranking.end(), int(i) + 1) == ranking.end()) {
        ranking.push_back(int(i) + 1);
      }
    }
    nlohmann::json j = {{"ranking", ranking},
                        {"rationale", "supporting cells first, others in table order"}};
    return j.dump();
  }

  if (task == "map-cells") {
    const IndexedSample* s = impl_->by_claim(rendered);
    if (!s) throw MockMiss("oracle: unknown claim in mapping prompt");
    std::vector<core::CellRef> cells = parse_cells(rendered, "- cell (");
    nlohmann::json assignments = nlohmann::json::array();
    for (const auto& cell : cells) {
      const agents::DataMark* mark = nullptr;
      for (const auto& m : s->marks) {
        if (m.cell && *m.cell == cell) {
          mark = &m;
          break;
        }
      }
      if (!mark) continue;
      int mark_id = mark->id;
      if (impl_->mislocalize_every > 0 && s->marks.size() > 1) {
        long n = ++impl_->mapping_counter;
        if (n % impl_->mislocalize_every == 0) {
          mark_id = mark_id % int(s->marks.size()) + 1;  // a different existing mark
        }
      }
      assignments.push_back({{"cell", {cell.row, cell.col}}, {"mark", mark_id}});
    }
    nlohmann::json j = {{"assignments", std::move(assignments)}};
    return j.dump();
  }

  if (task == "direct-bbox") {
    const IndexedSample* s = impl_->by_claim(rendered);
    if (!s) throw MockMiss("oracle: unknown claim in baseline prompt");
    nlohmann::json boxes = nlohmann::json::array();
    for (const auto& cell : s->sample.gt_cells) {
      for (const auto& m : s->marks) {
        if (m.cell && *m.cell == cell) {
          boxes.push_back(core::bbox_to_json(m.region));
          break;
        }
      }
    }
    nlohmann::json j = {{"boxes", std::move(boxes)}};
    return j.dump();
  }

  throw MockMiss("oracle: unrecognized task in prompt: " + task);
}

}  // namespace chartattrib::llm
