#include "chartattrib/core/types.hpp"

#include <charconv>
#include <cmath>

#include "chartattrib/core/errors.hpp"

namespace chartattrib::core {

std::string to_string(ChartType t) {
  switch (t) {
    case ChartType::bar: return "bar";
    case ChartType::pie: return "pie";
    case ChartType::line: return "line";
  }
  return "bar";
}

ChartType chart_type_from_string(const std::string& s) {
  if (s == "bar") return ChartType::bar;
  if (s == "pie") return ChartType::pie;
  if (s == "line") return ChartType::line;
  throw Error("unknown chart type: " + s);
}

bool cell_is_number(const CellValue& v) { return std::holds_alternative<double>(v); }

double cell_number(const CellValue& v) { return std::get<double>(v); }

std::string cell_text(const CellValue& v) { return std::get<std::string>(v); }

std::string format_cell(const CellValue& v) {
  if (cell_is_number(v)) return nlohmann::json(cell_number(v)).dump();
  return cell_text(v);
}

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// "1,234,567.5" -> "1234567.5" when commas form digit groups of three;
// any other comma placement leaves the text untouched (and non-numeric).
std::string strip_thousands_separators(const std::string& s) {
  if (s.find(',') == std::string::npos) return s;
  size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  size_t lead = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    ++i;
    ++lead;
  }
  if (lead == 0 || lead > 3) return s;
  size_t groups = 0;
  while (i < s.size() && s[i] == ',') {
    for (size_t k = 1; k <= 3; ++k) {
      if (i + k >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i + k]))) return s;
    }
    i += 4;
    ++groups;
  }
  if (groups == 0) return s;
  // Remainder must be fraction/exponent, not more digits.
  if (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) return s;
  std::string out;
  for (char c : s) {
    if (c != ',') out.push_back(c);
  }
  return out;
}

std::optional<double> parse_finite_number(const std::string& trimmed) {
  if (trimmed.empty()) return std::nullopt;
  std::string cleaned = strip_thousands_separators(trimmed);
  if (cleaned.find(',') != std::string::npos) return std::nullopt;
  const char* begin = cleaned.data();
  const char* end = begin + cleaned.size();
  if (*begin == '+') ++begin;  // from_chars rejects a leading '+'
  double value = 0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace

CellValue normalize_cell_text(const std::string& text) {
  std::string t = trim(text);
  if (auto num = parse_finite_number(t)) return *num;
  return t;
}

DataTable::DataTable(std::vector<std::string> column_headers,
                     std::vector<std::string> row_headers,
                     std::vector<std::vector<CellValue>> cells)
    : column_headers_(std::move(column_headers)),
      row_headers_(std::move(row_headers)),
      cells_(std::move(cells)) {
  if (column_headers_.empty()) throw InvalidTable("table needs at least one column");
  if (row_headers_.empty()) throw InvalidTable("table needs at least one row");
  if (cells_.size() != row_headers_.size()) {
    throw InvalidTable("cell grid has " + std::to_string(cells_.size()) + " rows, expected " +
                       std::to_string(row_headers_.size()));
  }
  for (auto& row : cells_) {
    if (row.size() != column_headers_.size()) {
      throw InvalidTable("ragged cell grid: row of length " + std::to_string(row.size()) +
                         ", expected " + std::to_string(column_headers_.size()));
    }
    for (auto& cell : row) {
      if (cell_is_number(cell)) {
        if (!std::isfinite(cell_number(cell))) throw InvalidTable("non-finite numeric cell");
      } else {
        cell = normalize_cell_text(cell_text(cell));
      }
    }
  }
}

bool DataTable::all_numeric() const {
  for (const auto& row : cells_) {
    for (const auto& cell : row) {
      if (!cell_is_number(cell)) return false;
    }
  }
  return true;
}

std::vector<std::string> BBox::violations() const {
  std::vector<std::string> out;
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(x_min) || !in_unit(y_min) || !in_unit(x_max) || !in_unit(y_max)) {
    out.push_back("box coordinate outside [0,1]");
  }
  if (x_min > x_max) out.push_back("inverted box: x_min > x_max");
  if (y_min > y_max) out.push_back("inverted box: y_min > y_max");
  if (!std::isfinite(x_min) || !std::isfinite(y_min) || !std::isfinite(x_max) ||
      !std::isfinite(y_max)) {
    out.push_back("non-finite box coordinate");
  }
  return out;
}

nlohmann::json table_to_json(const DataTable& table) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& row : table.cells()) {
    nlohmann::json jr = nlohmann::json::array();
    for (const auto& cell : row) {
      if (cell_is_number(cell)) {
        jr.push_back(cell_number(cell));
      } else {
        jr.push_back(cell_text(cell));
      }
    }
    cells.push_back(std::move(jr));
  }
  return {{"column_headers", table.column_headers()},
          {"row_headers", table.row_headers()},
          {"cells", std::move(cells)}};
}

DataTable table_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("column_headers") || !j.contains("row_headers") ||
      !j.contains("cells")) {
    throw InvalidTable("table json needs column_headers, row_headers, cells");
  }
  std::vector<std::string> cols = j.at("column_headers").get<std::vector<std::string>>();
  std::vector<std::string> rows = j.at("row_headers").get<std::vector<std::string>>();
  std::vector<std::vector<CellValue>> cells;
  for (const auto& jr : j.at("cells")) {
    std::vector<CellValue> row;
    for (const auto& jc : jr) {
      if (jc.is_number()) {
        row.emplace_back(jc.get<double>());
      } else if (jc.is_string()) {
        row.emplace_back(jc.get<std::string>());
      } else {
        throw InvalidTable("cell must be number or string");
      }
    }
    cells.push_back(std::move(row));
  }
  return DataTable(std::move(cols), std::move(rows), std::move(cells));
}

nlohmann::json bbox_to_json(const BBox& b) {
  return nlohmann::json::array({b.x_min, b.y_min, b.x_max, b.y_max});
}

BBox bbox_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw Error("box must be [x0,y0,x1,y1]");
  return BBox{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

nlohmann::json citations_to_json(const std::string& sample_id,
                                 const std::vector<Citation>& citations) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : citations) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& ref : c.cells) cells.push_back({ref.row, ref.col});
    nlohmann::json boxes = nlohmann::json::array();
    for (const auto& b : c.boxes) boxes.push_back(bbox_to_json(b));
    arr.push_back({{"claim_index", c.claim_index},
                   {"claim_text", c.claim_text},
                   {"cells", std::move(cells)},
                   {"boxes", std::move(boxes)},
                   {"rationale", c.rationale}});
  }
  return {{"sample_id", sample_id}, {"citations", std::move(arr)}};
}

std::vector<Citation> citations_from_json(const nlohmann::json& j) {
  std::vector<Citation> out;
  for (const auto& jc : j.at("citations")) {
    Citation c;
    c.claim_index = jc.at("claim_index").get<int>();
    c.claim_text = jc.value("claim_text", "");
    for (const auto& cell : jc.at("cells")) {
      c.cells.push_back({cell.at(0).get<int>(), cell.at(1).get<int>()});
    }
    for (const auto& box : jc.at("boxes")) c.boxes.push_back(bbox_from_json(box));
    c.rationale = jc.value("rationale", "");
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<std::string> validate_citation(const Citation& cit, const DataTable& table) {
  std::vector<std::string> out;
  if (cit.cells.empty()) out.push_back("citation has no cells");
  for (const auto& ref : cit.cells) {
    if (ref.row < 0 || size_t(ref.row) >= table.rows()) {
      out.push_back("row out of range: " + std::to_string(ref.row));
    }
    if (ref.col < 0 || size_t(ref.col) >= table.cols()) {
      out.push_back("col out of range: " + std::to_string(ref.col));
    }
  }
  for (const auto& box : cit.boxes) {
    for (auto& v : box.violations()) out.push_back(v);
  }
  return out;
}

}  // namespace chartattrib::core
