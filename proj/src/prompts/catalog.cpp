#include "chartattrib/prompts/catalog.hpp"

#include "chartattrib/core/errors.hpp"

namespace chartattrib::prompts {

namespace {

const std::map<std::string, Template>& catalog() {
  static const std::map<std::string, Template> kCatalog = {
      {"extract.bar",
       {"You read charts precisely and transcribe their data tables.",
        "TASK: extract-table\n"
        "Chart kind: bar\n"
        "Transcribe the bar chart in the final image into an HTML table.\n"
        "Use the exact format of the worked examples: first row holds column headers\n"
        "(leave the corner cell empty), first column holds row headers, one <td> per\n"
        "value. Read bar heights against the axis labels. Output only the HTML table."}},
      {"extract.pie",
       {"You read charts precisely and transcribe their data tables.",
        "TASK: extract-table\n"
        "Chart kind: pie\n"
        "Transcribe the pie chart in the final image into an HTML table with a single\n"
        "data row. Use the exact format of the worked examples: first row holds the\n"
        "slice labels (leave the corner cell empty), the data row holds one <td> per\n"
        "slice value. Output only the HTML table."}},
      {"extract.line",
       {"You read charts precisely and transcribe their data tables.",
        "TASK: extract-table\n"
        "Chart kind: line\n"
        "Transcribe the line chart in the final image into an HTML table.\n"
        "Use the exact format of the worked examples: first row holds the x-axis\n"
        "labels (leave the corner cell empty), one row per series with its values.\n"
        "Output only the HTML table."}},
      {"reflect",
       {"You verify chart transcriptions by comparing images.",
        "TASK: verify-extraction\n"
        "The first image is the original chart. The second image was re-rendered from\n"
        "this extracted table:\n{table_html}\n"
        "Check whether the re-rendered chart is consistent with the original: same\n"
        "number of marks, matching relative sizes, matching labels.\n"
        "Respond with JSON: {\"consistent\": true|false, \"discrepancies\": [\"...\"]}.\n"
        "List one discrepancy string per mismatch; leave the list empty when consistent."}},
      {"refine",
       {"You read charts precisely and transcribe their data tables.",
        "TASK: refine-extraction\n"
        "Your previous transcription of this chart was:\n{previous_html}\n"
        "A visual comparison flagged these discrepancies:\n{discrepancies}\n"
        "Produce a corrected HTML table in the same format. Output only the HTML table."}},
      {"reformulate",
       {"You split answers into independent single-fact sentences.",
        "TASK: reformulate-answer\n"
        "Rewrite the answer as an ordered list of independent declarative sentences,\n"
        "one fact each, preserving the collective meaning exactly.\n"
        "Examples:\n"
        "Answer: \"Sales were 10 in 2020.\"\n"
        "-> {\"claims\": [\"Sales were 10 in 2020.\"]}\n"
        "Answer: \"A was 5 and B was 8, so B was larger.\"\n"
        "-> {\"claims\": [\"A was 5.\", \"B was 8.\", \"B was larger than A.\"]}\n"
        "Answer: \"Revenue doubled from 20 in 2019 to 40 in 2021.\"\n"
        "-> {\"claims\": [\"Revenue was 20 in 2019.\", \"Revenue was 40 in 2021.\",\n"
        "    \"Revenue doubled between 2019 and 2021.\"]}\n"
        "Question: {question}\n"
        "Answer: {answer}\n"
        "Respond with JSON: {\"claims\": [\"...\"]}."}},
      {"caption.row",
       {"You describe table entities for retrieval.",
        "TASK: caption-row\n"
        "Table:\n{table_html}\n"
        "Row {row_index} header: {row_header}\n"
        "Row cells: {cells}\n"
        "Write one informative sentence describing this row in context: what it\n"
        "measures, notable values, trends or outliers relative to the other rows.\n"
        "Respond with JSON: {\"caption\": \"...\"}."}},
      {"caption.col",
       {"You describe table entities for retrieval.",
        "TASK: caption-column\n"
        "Table:\n{table_html}\n"
        "Column {col_index} header: {col_header}\n"
        "Column cells: {cells}\n"
        "Write one informative sentence describing this column in context: units or\n"
        "meaning, how its values relate to the row headers.\n"
        "Respond with JSON: {\"caption\": \"...\"}."}},
      {"caption.cell",
       {"You describe table entities for retrieval.",
        "TASK: caption-cell\n"
        "Cell ({row_header}, {col_header}) value: {value}\n"
        "Row caption: {row_caption}\n"
        "Column caption: {col_caption}\n"
        "Write one sentence describing what this specific cell asserts, grounded in\n"
        "its row and column context.\n"
        "Respond with JSON: {\"caption\": \"...\"}."}},
      {"prefilter.row",
       {"You score retrieval relevance. Think step by step, then plan the checks and"
        " carry them out before scoring.",
        "TASK: prefilter-row\n"
        "Claim: {claim}\n"
        "Row {row_index} header: {row_header}\n"
        "Caption: {caption}\n"
        "How relevant is this row to the claim? First reason briefly about whether\n"
        "the claim's entities and values could come from this row, then score.\n"
        "Respond with JSON: {\"score\": 0.0-1.0, \"rationale\": \"...\"}."}},
      {"prefilter.col",
       {"You score retrieval relevance. Think step by step, then plan the checks and"
        " carry them out before scoring.",
        "TASK: prefilter-column\n"
        "Claim: {claim}\n"
        "Column {col_index} header: {col_header}\n"
        "Caption: {caption}\n"
        "How relevant is this column to the claim? First reason briefly about whether\n"
        "the claim's entities and values could come from this column, then score.\n"
        "Respond with JSON: {\"score\": 0.0-1.0, \"rationale\": \"...\"}."}},
      {"rerank",
       {"You rank evidence candidates for a claim.",
        "TASK: rerank-cells\n"
        "Claim: {claim}\n"
        "Candidate cells:\n{candidates}\n"
        "Order the candidate numbers from most to least supportive of the claim.\n"
        "Explain the ordering layer by layer: which cells directly state the claim,\n"
        "which merely relate to it, which are irrelevant.\n"
        "Respond with JSON: {\"ranking\": [numbers], \"rationale\": \"...\"}."}},
      {"som.map",
       {"You match cited table cells to labeled regions in a chart image.",
        "TASK: map-cells\n"
        "The image shows a chart with numbered labels on its data marks.\n"
        "Marks present: {marks}\n"
        "Claim: {claim}\n"
        "Cited cells:\n{cells}\n"
        "For each cited cell, pick the mark number showing that value.\n"
        "Respond with JSON: {\"assignments\": [{\"cell\": [row, col], \"mark\": number}]}."}},
      {"som.verify",
       {"You verify visual citations.",
        "TASK: verify-citation\n"
        "The image shows a chart with highlighted regions at these normalized boxes:\n"
        "{boxes}\n"
        "Claim: {claim}\n"
        "Do the highlighted regions show exactly the data supporting the claim?\n"
        "Respond with JSON: {\"consistent\": true|false, \"discrepancies\": [\"...\"]}."}},
      {"baseline.bbox",
       {"You locate chart regions supporting statements.",
        "TASK: direct-bbox\n"
        "Claim: {claim}\n"
        "Propose bounding boxes for the chart regions that support the claim, as\n"
        "normalized [x_min, y_min, x_max, y_max] with origin at the top-left.\n"
        "Respond with JSON: {\"boxes\": [[x0, y0, x1, y1]]}."}},
  };
  return kCatalog;
}

}  // namespace

const Template& get(const std::string& name) {
  const auto& cat = catalog();
  auto it = cat.find(name);
  if (it == cat.end()) throw Error("unknown prompt template: " + name);
  return it->second;
}

std::vector<std::string> names() {
  std::vector<std::string> out;
  for (const auto& [name, tpl] : catalog()) out.push_back(name);
  return out;
}

std::string render(const std::string& text, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c != '{') {
      out.push_back(c);
      ++i;
      continue;
    }
    size_t close = text.find('}', i);
    if (close == std::string::npos) {
      out.append(text, i, std::string::npos);
      break;
    }
    std::string key = text.substr(i + 1, close - i - 1);
    auto it = vars.find(key);
    if (it != vars.end()) {
      out += it->second;
      i = close + 1;
    } else if (key.find(' ') != std::string::npos || key.find('"') != std::string::npos ||
               key.find(':') != std::string::npos || key.empty()) {
      // literal JSON braces inside template text
      out.push_back(c);
      ++i;
    } else {
      throw Error("unbound placeholder {" + key + "} in prompt template");
    }
  }
  return out;
}

}  // namespace chartattrib::prompts
