#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace chartattrib::core {

enum class ChartType { bar, pie, line };

std::string to_string(ChartType t);
ChartType chart_type_from_string(const std::string& s);

/// A cell is a number when its full trimmed text parses as a finite decimal
/// (optional sign, exponent, digit-group commas); otherwise trimmed text.
using CellValue = std::variant<std::string, double>;

bool cell_is_number(const CellValue& v);
double cell_number(const CellValue& v);
std::string cell_text(const CellValue& v);

/// Renders a cell for prompts and HTML; numbers use the shortest
/// round-trippable decimal form.
std::string format_cell(const CellValue& v);

/// Parses trimmed text into the canonical CellValue.
CellValue normalize_cell_text(const std::string& text);

/// Rectangular grid of cells with one header list per axis. Construction
/// trims and canonicalizes cells and rejects ragged grids.
class DataTable {
 public:
  DataTable(std::vector<std::string> column_headers, std::vector<std::string> row_headers,
            std::vector<std::vector<CellValue>> cells);

  const std::vector<std::string>& column_headers() const { return column_headers_; }
  const std::vector<std::string>& row_headers() const { return row_headers_; }
  const std::vector<std::vector<CellValue>>& cells() const { return cells_; }

  size_t rows() const { return row_headers_.size(); }
  size_t cols() const { return column_headers_.size(); }
  const CellValue& at(size_t row, size_t col) const { return cells_[row][col]; }

  bool all_numeric() const;

  bool operator==(const DataTable&) const = default;

 private:
  std::vector<std::string> column_headers_;
  std::vector<std::string> row_headers_;
  std::vector<std::vector<CellValue>> cells_;
};

struct CellRef {
  int row = 0;
  int col = 0;
  auto operator<=>(const CellRef&) const = default;
};

/// Axis-aligned box in normalized image coordinates, origin top-left.
struct BBox {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  double cx() const { return (x_min + x_max) / 2; }
  double cy() const { return (y_min + y_max) / 2; }

  /// Empty when valid; otherwise one message per broken invariant.
  std::vector<std::string> violations() const;
  bool valid() const { return violations().empty(); }

  bool operator==(const BBox&) const = default;
};

struct Point {
  double x = 0, y = 0;
  bool operator==(const Point&) const = default;
};

struct Claim {
  int index = 0;
  std::string text;
};

struct Citation {
  int claim_index = 0;
  std::string claim_text;
  std::vector<CellRef> cells;
  std::vector<BBox> boxes;
  std::string rationale;
};

// --- canonical JSON forms -------------------------------------------------

nlohmann::json table_to_json(const DataTable& table);
DataTable table_from_json(const nlohmann::json& j);

nlohmann::json bbox_to_json(const BBox& b);
BBox bbox_from_json(const nlohmann::json& j);

nlohmann::json citations_to_json(const std::string& sample_id,
                                 const std::vector<Citation>& citations);
std::vector<Citation> citations_from_json(const nlohmann::json& j);

/// validate_citation: all cell refs in range and all boxes well-formed.
/// Returns violations instead of throwing.
std::vector<std::string> validate_citation(const Citation& cit, const DataTable& table);

}  // namespace chartattrib::core
