#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rbflow/error.hpp"

namespace rbflow {

/// Rectangular metric grid: one row per key (e.g. vehicle count), one column
/// per method. Cells keep their original text alongside the parsed value so
/// parse -> render reproduces a fixture file byte for byte.
struct ComparisonTable {
  std::string row_key_name;
  std::vector<std::string> methods;
  struct Row {
    std::string key;
    std::vector<std::string> cell_text;
    std::vector<double> cell_value;
  };
  std::vector<Row> rows;
  std::string source = "fixture";  // "fixture" or "computed"
};

inline ComparisonTable parse_comparison_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("comparison csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  ComparisonTable table;
  {
    std::istringstream hs(line);
    std::string field;
    bool first = true;
    while (std::getline(hs, field, ',')) {
      if (first) {
        table.row_key_name = field;
        first = false;
      } else {
        table.methods.push_back(field);
      }
    }
    if (first || table.methods.empty()) throw ParseError("comparison csv: bad header");
  }

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    ComparisonTable::Row row;
    bool first = true;
    while (std::getline(ls, field, ',')) {
      if (first) {
        row.key = field;
        first = false;
        continue;
      }
      try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
        if (v < 0.0) throw ParseError("comparison csv line " + std::to_string(lineno) +
                                      ": negative cell");
        row.cell_value.push_back(v);
      } catch (const ParseError&) {
        throw;
      } catch (const std::exception&) {
        throw ParseError("comparison csv line " + std::to_string(lineno) + ": unparsable cell '" +
                         field + "'");
      }
      row.cell_text.push_back(field);
    }
    if (row.cell_text.size() != table.methods.size()) {
      throw ParseError("comparison csv line " + std::to_string(lineno) +
                       ": expected " + std::to_string(table.methods.size()) + " cells");
    }
    for (const auto& existing : table.rows) {
      if (existing.key == row.key) {
        throw ParseError("comparison csv line " + std::to_string(lineno) + ": duplicate row key '" +
                         row.key + "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

/// Inverse of parse_comparison_csv; cells echo their original text.
inline std::string render_comparison_csv(const ComparisonTable& table) {
  std::string out = table.row_key_name;
  for (const auto& m : table.methods) {
    out += ',';
    out += m;
  }
  out += '\n';
  for (const auto& row : table.rows) {
    out += row.key;
    for (const auto& cell : row.cell_text) {
      out += ',';
      out += cell;
    }
    out += '\n';
  }
  return out;
}

inline std::vector<double> column_means(const ComparisonTable& table) {
  if (table.rows.empty()) throw ValueError("column_means: table has no rows");
  std::vector<double> means(table.methods.size(), 0.0);
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < means.size(); ++c) means[c] += row.cell_value[c];
  }
  for (double& m : means) m /= static_cast<double>(table.rows.size());
  return means;
}

namespace detail {

inline std::string format_cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace detail

/// Markdown rendering with a mean row and optional notes. When the fixture
/// ships a published summary average, a mismatch against the recomputed
/// column mean is called out rather than silently corrected.
inline std::string render_comparison_markdown(const ComparisonTable& table,
                                              const std::vector<std::string>& notes = {}) {
  std::string out = "| " + table.row_key_name;
  for (const auto& m : table.methods) out += " | " + m;
  out += " |\n|";
  for (std::size_t i = 0; i < table.methods.size() + 1; ++i) out += " --- |";
  out += "\n";
  for (const auto& row : table.rows) {
    out += "| " + row.key;
    for (const auto& cell : row.cell_text) out += " | " + cell;
    out += " |\n";
  }
  if (!table.rows.empty()) {
    out += "| mean";
    for (double m : column_means(table)) out += " | " + detail::format_cell(m);
    out += " |\n";
  }
  if (!notes.empty()) {
    out += "\nNotes:\n";
    for (const auto& n : notes) out += "- " + n + "\n";
  }
  return out;
}

/// Merges per-model evaluation results into a computed table: one row per
/// dataset key, one column per model. The same (row, model) slot filled
/// twice with different values is an inconsistency.
struct ComputedCell {
  std::string row_key;
  std::string method;
  double value = 0.0;
};

inline ComparisonTable build_computed_table(const std::string& row_key_name,
                                            const std::vector<ComputedCell>& cells,
                                            const std::string& cell_format = "%.4f") {
  ComparisonTable table;
  table.row_key_name = row_key_name;
  table.source = "computed";
  for (const auto& cell : cells) {
    if (std::find(table.methods.begin(), table.methods.end(), cell.method) ==
        table.methods.end()) {
      table.methods.push_back(cell.method);
    }
  }
  for (const auto& cell : cells) {
    auto row = std::find_if(table.rows.begin(), table.rows.end(),
                            [&](const ComparisonTable::Row& r) { return r.key == cell.row_key; });
    if (row == table.rows.end()) {
      table.rows.push_back({cell.row_key, std::vector<std::string>(table.methods.size(), ""),
                            std::vector<double>(table.methods.size(), std::nan(""))});
      row = table.rows.end() - 1;
    }
    row->cell_text.resize(table.methods.size(), "");
    row->cell_value.resize(table.methods.size(), std::nan(""));
    const std::size_t col = static_cast<std::size_t>(
        std::find(table.methods.begin(), table.methods.end(), cell.method) -
        table.methods.begin());
    if (!row->cell_text[col].empty() && row->cell_value[col] != cell.value) {
      throw ValueError("comparison: inconsistent duplicate cell for row '" + cell.row_key +
                       "', method '" + cell.method + "'");
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), cell_format.c_str(), cell.value);
    row->cell_text[col] = buf;
    row->cell_value[col] = cell.value;
  }
  for (auto& row : table.rows) {
    for (const auto& cell : row.cell_text) {
      if (cell.empty()) {
        throw ValueError("comparison: row '" + row.key + "' is missing a cell; keys inconsistent");
      }
    }
  }
  return table;
}

}  // namespace rbflow
