#include "chartattrib/core/html_table.hpp"

#include <algorithm>
#include <cctype>

#include "chartattrib/core/errors.hpp"

namespace chartattrib::core {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return s;
}

// Finds the next tag at or after pos; returns {name, open_pos, content_start}.
struct Tag {
  std::string name;  // lowercase, without '/'
  bool closing = false;
  size_t start = std::string::npos;
  size_t end = std::string::npos;  // one past '>'
};

Tag next_tag(const std::string& s, size_t pos) {
  Tag t;
  size_t lt = s.find('<', pos);
  if (lt == std::string::npos) return t;
  size_t gt = s.find('>', lt);
  if (gt == std::string::npos) throw MalformedHtml("unterminated tag");
  size_t name_begin = lt + 1;
  if (name_begin < gt && s[name_begin] == '/') {
    t.closing = true;
    ++name_begin;
  }
  size_t name_end = name_begin;
  while (name_end < gt && (std::isalnum(static_cast<unsigned char>(s[name_end])))) ++name_end;
  t.name = lower(s.substr(name_begin, name_end - name_begin));
  t.start = lt;
  t.end = gt + 1;
  return t;
}

std::string decode_entities(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    size_t semi = s.find(';', i);
    if (semi == std::string::npos || semi - i > 8) {
      out.push_back(s[i++]);
      continue;
    }
    std::string ent = s.substr(i + 1, semi - i - 1);
    if (ent == "amp") {
      out.push_back('&');
    } else if (ent == "lt") {
      out.push_back('<');
    } else if (ent == "gt") {
      out.push_back('>');
    } else if (ent == "quot") {
      out.push_back('"');
    } else if (ent == "apos") {
      out.push_back('\'');
    } else if (!ent.empty() && ent[0] == '#') {
      int code = std::atoi(ent.c_str() + 1);
      if (code > 0 && code < 128) {
        out.push_back(char(code));
      } else {
        out.append(s, i, semi - i + 1);
      }
    } else {
      out.append(s, i, semi - i + 1);
    }
    i = semi + 1;
  }
  return out;
}

std::string encode_entities(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// Cell text with nested markup stripped, entities decoded.
std::string extract_text(const std::string& s, size_t begin, size_t end) {
  std::string out;
  size_t i = begin;
  while (i < end) {
    if (s[i] == '<') {
      size_t gt = s.find('>', i);
      if (gt == std::string::npos || gt >= end) break;
      i = gt + 1;
    } else {
      out.push_back(s[i++]);
    }
  }
  return decode_entities(out);
}

}  // namespace

DataTable parse_table_html(const std::string& html) {
  std::string low = lower(html);
  size_t table_open = low.find("<table");
  if (table_open == std::string::npos) throw MalformedHtml("no <table> tag found");
  size_t table_close = low.rfind("</table");
  if (table_close == std::string::npos || table_close < table_open) {
    throw MalformedHtml("missing </table>");
  }

  // Collect rows, then cells per row.
  std::vector<std::vector<std::string>> grid;
  size_t pos = low.find('>', table_open) + 1;
  while (pos < table_close) {
    Tag t = next_tag(html, pos);
    if (t.start == std::string::npos || t.start >= table_close) break;
    if (t.closing || (t.name != "tr")) {
      pos = t.end;
      continue;
    }
    // Row ends at the matching </tr> or at the next <tr>/table end.
    size_t row_end = table_close;
    size_t scan = t.end;
    while (scan < table_close) {
      Tag u = next_tag(html, scan);
      if (u.start == std::string::npos || u.start >= table_close) break;
      if (u.name == "tr") {
        row_end = u.start;
        break;
      }
      scan = u.end;
    }
    // Cells inside [t.end, row_end)
    std::vector<std::string> cells;
    size_t cpos = t.end;
    while (cpos < row_end) {
      Tag c = next_tag(html, cpos);
      if (c.start == std::string::npos || c.start >= row_end) break;
      if (!c.closing && (c.name == "td" || c.name == "th")) {
        // Content ends at the matching close tag or the next cell/row tag.
        size_t content_end = row_end;
        size_t s2 = c.end;
        while (s2 < row_end) {
          Tag e = next_tag(html, s2);
          if (e.start == std::string::npos || e.start >= row_end) break;
          if (e.name == "td" || e.name == "th" || e.name == "tr") {
            content_end = e.start;
            if (e.closing) s2 = e.end;
            break;
          }
          s2 = e.end;
        }
        cells.push_back(extract_text(html, c.end, content_end));
        cpos = std::max(content_end, c.end);
      } else {
        cpos = c.end;
      }
    }
    if (!cells.empty()) grid.push_back(std::move(cells));
    pos = std::max(row_end, t.end);
  }

  if (grid.size() < 2) throw MalformedHtml("table needs a header row and at least one data row");
  size_t width = grid[0].size();
  if (width < 2) throw MalformedHtml("table needs a row-header column and at least one data column");
  for (const auto& row : grid) {
    if (row.size() != width) {
      throw RaggedRows("row has " + std::to_string(row.size()) + " cells, expected " +
                       std::to_string(width));
    }
  }

  std::vector<std::string> col_headers(grid[0].begin() + 1, grid[0].end());
  std::vector<std::string> row_headers;
  std::vector<std::vector<CellValue>> cells;
  for (size_t r = 1; r < grid.size(); ++r) {
    row_headers.push_back(grid[r][0]);
    std::vector<CellValue> row;
    for (size_t c = 1; c < width; ++c) row.emplace_back(grid[r][c]);
    cells.push_back(std::move(row));
  }
  // Headers keep raw trimmed text.
  auto trim_str = [](std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    size_t e = s.find_last_not_of(" \t\r\n");
    s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
  };
  for (auto& h : col_headers) trim_str(h);
  for (auto& h : row_headers) trim_str(h);
  return DataTable(std::move(col_headers), std::move(row_headers), std::move(cells));
}

std::string serialize_table_html(const DataTable& table) {
  std::string out = "<table><tr><th></th>";
  for (const auto& h : table.column_headers()) {
    out += "<th>" + encode_entities(h) + "</th>";
  }
  out += "</tr>";
  for (size_t r = 0; r < table.rows(); ++r) {
    out += "<tr><th>" + encode_entities(table.row_headers()[r]) + "</th>";
    for (size_t c = 0; c < table.cols(); ++c) {
      out += "<td>" + encode_entities(format_cell(table.at(r, c))) + "</td>";
    }
    out += "</tr>";
  }
  out += "</table>";
  return out;
}

}  // namespace chartattrib::core
