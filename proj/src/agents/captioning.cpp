#include "chartattrib/agents/captioning.hpp"

#include "chartattrib/core/errors.hpp"
#include "chartattrib/core/html_table.hpp"
#include "chartattrib/prompts/catalog.hpp"
#include "chartattrib/util/parallel.hpp"

namespace chartattrib::agents {

namespace {

std::string join_cells(const core::DataTable& table, size_t row) {
  std::string out;
  for (size_t c = 0; c < table.cols(); ++c) {
    if (c) out += ", ";
    out += table.column_headers()[c] + "=" + core::format_cell(table.at(row, c));
  }
  return out;
}

std::string join_column(const core::DataTable& table, size_t col) {
  std::string out;
  for (size_t r = 0; r < table.rows(); ++r) {
    if (r) out += ", ";
    out += table.row_headers()[r] + "=" + core::format_cell(table.at(r, col));
  }
  return out;
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

// One structured caption call; model failure or empty output degrades to
// the provided fallback.
std::string caption_call(llm::Gateway& gateway, llm::Backend& backend,
                         const std::string& template_name,
                         const std::map<std::string, std::string>& vars,
                         const std::string& fallback) {
  const auto& tpl = prompts::get(template_name);
  llm::Prompt prompt =
      llm::make_prompt(tpl.system, {llm::TextPart{prompts::render(tpl.user, vars)}});
  nlohmann::json schema = {{"type", "object"},
                           {"required", {"caption"}},
                           {"properties", {{"caption", {{"type", "string"}}}}}};
  try {
    nlohmann::json v = gateway.complete_structured(backend, prompt, schema);
    std::string caption = v.at("caption").get<std::string>();
    if (blank(caption)) return fallback;
    return caption;
  } catch (const StructuredOutputExhausted&) {
    return fallback;
  }
}

}  // namespace

std::string fallback_row_caption(const core::DataTable& table, size_t row) {
  return "Row '" + table.row_headers()[row] + "': " + join_cells(table, row);
}

std::string fallback_col_caption(const core::DataTable& table, size_t col) {
  return "Column '" + table.column_headers()[col] + "': " + join_column(table, col);
}

std::string fallback_cell_caption(const core::DataTable& table, size_t row, size_t col) {
  return "Cell (" + table.row_headers()[row] + ", " + table.column_headers()[col] +
         ") = " + core::format_cell(table.at(row, col));
}

std::vector<std::string> caption_rows(llm::Gateway& gateway, llm::Backend& backend,
                                      const core::DataTable& table,
                                      const CaptionOptions& opts) {
  std::string html = core::serialize_table_html(table);
  std::vector<std::string> out(table.rows());
  util::parallel_for(table.rows(), size_t(std::max(1, opts.parallelism)), [&](size_t r) {
    out[r] = caption_call(gateway, backend, "caption.row",
                          {{"table_html", html},
                           {"row_index", std::to_string(r)},
                           {"row_header", table.row_headers()[r]},
                           {"cells", join_cells(table, r)}},
                          fallback_row_caption(table, r));
  });
  return out;
}

std::vector<std::string> caption_columns(llm::Gateway& gateway, llm::Backend& backend,
                                         const core::DataTable& table,
                                         const CaptionOptions& opts) {
  std::string html = core::serialize_table_html(table);
  std::vector<std::string> out(table.cols());
  util::parallel_for(table.cols(), size_t(std::max(1, opts.parallelism)), [&](size_t c) {
    out[c] = caption_call(gateway, backend, "caption.col",
                          {{"table_html", html},
                           {"col_index", std::to_string(c)},
                           {"col_header", table.column_headers()[c]},
                           {"cells", join_column(table, c)}},
                          fallback_col_caption(table, c));
  });
  return out;
}

std::vector<std::vector<std::string>> caption_cells(
    llm::Gateway& gateway, llm::Backend& backend, const core::DataTable& table,
    const std::vector<std::string>& row_captions,
    const std::vector<std::string>& col_captions, const CaptionOptions& opts) {
  if (row_captions.size() != table.rows() || col_captions.size() != table.cols()) {
    throw Error("caption lists must match table dimensions");
  }
  std::vector<std::vector<std::string>> out(table.rows(),
                                            std::vector<std::string>(table.cols()));
  util::parallel_for(
      table.rows() * table.cols(), size_t(std::max(1, opts.parallelism)), [&](size_t i) {
        size_t r = i / table.cols();
        size_t c = i % table.cols();
        out[r][c] = caption_call(gateway, backend, "caption.cell",
                                 {{"row_header", table.row_headers()[r]},
                                  {"col_header", table.column_headers()[c]},
                                  {"value", core::format_cell(table.at(r, c))},
                                  {"row_caption", row_captions[r]},
                                  {"col_caption", col_captions[c]}},
                                 fallback_cell_caption(table, r, c));
      });
  return out;
}

CaptionSet caption_table(llm::Gateway& gateway, llm::Backend& backend,
                         const core::DataTable& table, const CaptionOptions& opts) {
  CaptionSet set;
  set.row_captions = caption_rows(gateway, backend, table, opts);
  set.col_captions = caption_columns(gateway, backend, table, opts);
  set.cell_captions = caption_cells(gateway, backend, table, set.row_captions,
                                    set.col_captions, opts);
  return set;
}

}  // namespace chartattrib::agents
