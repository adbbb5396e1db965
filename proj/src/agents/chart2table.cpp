#include "chartattrib/agents/chart2table.hpp"

#include "chartattrib/core/errors.hpp"
#include "chartattrib/core/html_table.hpp"
#include "chartattrib/llm/schema.hpp"
#include "chartattrib/prompts/catalog.hpp"

namespace chartattrib::agents {

namespace {

core::DataTable exemplar_table(core::ChartType type, int which) {
  using core::CellValue;
  if (type == core::ChartType::pie) {
    if (which == 0) {
      return core::DataTable({"North", "South", "East"}, {"Share"},
                             {{CellValue(45.0), CellValue(30.0), CellValue(25.0)}});
    }
    return core::DataTable({"Rent", "Food", "Travel", "Other"}, {"Budget"},
                           {{CellValue(50.0), CellValue(20.0), CellValue(18.0),
                             CellValue(12.0)}});
  }
  if (which == 0) {
    return core::DataTable({"2020", "2021"}, {"Alpha", "Beta"},
                           {{CellValue(12.0), CellValue(18.0)},
                            {CellValue(9.0), CellValue(15.0)}});
  }
  return core::DataTable({"Q1", "Q2", "Q3"}, {"Units"},
                         {{CellValue(5.0), CellValue(11.0), CellValue(8.0)}});
}

}  // namespace

std::vector<std::pair<llm::ImagePart, std::string>> extraction_exemplars(
    core::ChartType chart_type) {
  std::vector<std::pair<llm::ImagePart, std::string>> out;
  for (int i = 0; i < 2; ++i) {
    core::DataTable table = exemplar_table(chart_type, i);
    chartgen::Layout layout = chartgen::default_layout(chart_type);
    layout.width = layout.width / 2;
    layout.height = layout.height / 2;
    auto render = chartgen::render_chart(table, chart_type, layout, 7u + uint32_t(i));
    out.emplace_back(llm::make_image_part(render.png),
                     core::serialize_table_html(table));
  }
  return out;
}

ReflectionVerdict reflect_consistency(llm::Gateway& gateway, llm::Backend& backend,
                                      const llm::ImagePart& original,
                                      const llm::ImagePart& rerendered,
                                      const core::DataTable& table) {
  const auto& tpl = prompts::get("reflect");
  std::string user =
      prompts::render(tpl.user, {{"table_html", core::serialize_table_html(table)}});
  llm::Prompt prompt = llm::make_prompt(
      tpl.system, {llm::TextPart{user}, llm::PromptPart(original), llm::PromptPart(rerendered)});
  nlohmann::json schema = {
      {"type", "object"},
      {"required", {"consistent"}},
      {"properties",
       {{"consistent", {{"type", "boolean"}}},
        {"discrepancies", {{"type", "array"}, {"items", {{"type", "string"}}}}}}}};
  nlohmann::json v = gateway.complete_structured(backend, prompt, schema);
  ReflectionVerdict verdict;
  verdict.consistent = v.at("consistent").get<bool>();
  for (const auto& d : v.value("discrepancies", nlohmann::json::array())) {
    verdict.discrepancies.push_back(d.get<std::string>());
  }
  // Invariant: consistent implies no discrepancies.
  if (verdict.consistent && !verdict.discrepancies.empty()) verdict.consistent = false;
  return verdict;
}

namespace {

std::string extract_html_validated(const std::string& raw) {
  size_t open = raw.find("<table");
  if (open == std::string::npos) {
    size_t open_upper = raw.find("<TABLE");
    open = open_upper;
  }
  if (open == std::string::npos) throw MalformedHtml("no <table> in response");
  size_t close = raw.rfind("</table>");
  if (close == std::string::npos) close = raw.rfind("</TABLE>");
  if (close == std::string::npos) throw MalformedHtml("no </table> in response");
  return raw.substr(open, close + 8 - open);
}

}  // namespace

ExtractionResult extract_table(llm::Gateway& gateway, llm::Backend& backend,
                               const llm::ImagePart& image, core::ChartType chart_type,
                               const ExtractOptions& opts) {
  if (opts.max_iterations < 1) throw Error("max_iterations must be >= 1");
  const auto& tpl = prompts::get("extract." + core::to_string(chart_type));

  auto exemplars = extraction_exemplars(chart_type);
  std::vector<llm::PromptPart> base_parts;
  base_parts.push_back(llm::TextPart{tpl.user});
  for (size_t i = 0; i < exemplars.size(); ++i) {
    base_parts.push_back(llm::TextPart{"Example " + std::to_string(i + 1) + ":"});
    base_parts.push_back(exemplars[i].first);
    base_parts.push_back(llm::TextPart{exemplars[i].second});
  }
  base_parts.push_back(llm::TextPart{"Now transcribe this chart:"});
  base_parts.push_back(image);

  auto table_validator = [](const std::string& raw) -> std::optional<std::string> {
    try {
      core::parse_table_html(extract_html_validated(raw));
      return std::nullopt;
    } catch (const Error& e) {
      return std::string(e.what());
    }
  };

  std::vector<std::string> transcript_keys;
  auto run_attempt = [&](const llm::Prompt& prompt) -> core::DataTable {
    std::string raw;
    try {
      raw = gateway.complete_with_repair(backend, prompt, table_validator, opts.max_repairs);
    } catch (const StructuredOutputExhausted& e) {
      throw ExtractionFailed("no parseable HTML table within the repair budget: " +
                             std::string(e.what()));
    }
    transcript_keys.push_back(llm::Gateway::transcript_key(backend.identity(), prompt));
    return core::parse_table_html(extract_html_validated(raw));
  };

  llm::Prompt prompt = llm::make_prompt(tpl.system, base_parts);
  core::DataTable table = run_attempt(prompt);

  int iterations = 0;
  bool consistent = false;
  for (int round = 1; round <= opts.max_iterations; ++round) {
    iterations = round;
    ReflectionVerdict verdict;
    bool rendered = false;
    try {
      chartgen::Layout layout = chartgen::default_layout(chart_type);
      auto render = chartgen::render_chart(table, chart_type, layout, 11u);
      rendered = true;
      verdict = reflect_consistency(gateway, backend, image,
                                    llm::make_image_part(render.png), table);
    } catch (const UnrenderableTable& e) {
      verdict.consistent = false;
      verdict.discrepancies = {std::string("extracted table cannot be re-rendered: ") +
                               e.what()};
    }
    (void)rendered;
    if (verdict.consistent) {
      consistent = true;
      break;
    }
    if (round == opts.max_iterations) break;

    // Refine with the model's own output plus the verdict, verbatim.
    const auto& refine_tpl = prompts::get("refine");
    std::string discrepancies;
    for (const auto& d : verdict.discrepancies) discrepancies += "- " + d + "\n";
    std::string refine_user = prompts::render(
        refine_tpl.user, {{"previous_html", core::serialize_table_html(table)},
                          {"discrepancies", discrepancies}});
    llm::Prompt refine_prompt =
        llm::make_prompt(refine_tpl.system, {llm::TextPart{refine_user}, image});
    table = run_attempt(refine_prompt);
  }

  return ExtractionResult{std::move(table), iterations, consistent,
                          std::move(transcript_keys)};
}

}  // namespace chartattrib::agents
