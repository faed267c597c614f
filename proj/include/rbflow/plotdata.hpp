#pragma once

#include <string>

#include "rbflow/compare.hpp"
#include "rbflow/genetic.hpp"
#include "rbflow/io_util.hpp"
#include "rbflow/training.hpp"

namespace rbflow {

/// Headered CSV series behind the standard plots. Pure string producers so
/// re-emission is byte-identical; the CLI writes them to disk atomically.

inline std::string loss_history_csv(const LossHistory& history) {
  if (history.train_loss.empty()) throw ValueError("loss_history_csv: empty history");
  const bool with_val = history.val_loss.size() == history.train_loss.size();
  std::string out = with_val ? "epoch,train_loss,val_loss\n" : "epoch,train_loss\n";
  for (std::size_t e = 0; e < history.train_loss.size(); ++e) {
    out += std::to_string(e);
    out += ',';
    out += format_double(history.train_loss[e]);
    if (with_val) {
      out += ',';
      out += format_double(history.val_loss[e]);
    }
    out += '\n';
  }
  return out;
}

inline std::string fitness_history_csv(const FitnessHistory& history) {
  if (history.best.empty()) throw ValueError("fitness_history_csv: empty history");
  std::string out = "generation,best_fitness,mean_fitness\n";
  for (std::size_t g = 0; g < history.best.size(); ++g) {
    out += std::to_string(g);
    out += ',';
    out += format_double(history.best[g]);
    out += ',';
    out += format_double(history.mean[g]);
    out += '\n';
  }
  return out;
}

/// MAE-versus-row-key series, one column per method (the comparison table
/// re-rendered, which keeps fixture bytes intact).
inline std::string comparison_plot_csv(const ComparisonTable& table) {
  if (table.rows.empty()) throw ValueError("comparison_plot_csv: table has no rows");
  return render_comparison_csv(table);
}

namespace detail {

inline std::vector<std::vector<double>> parse_series_csv(const std::string& text,
                                                         std::size_t min_cols,
                                                         std::size_t max_cols,
                                                         const char* what) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(std::string(what) + ": empty input");
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) {
      try {
        row.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw ParseError(std::string(what) + " line " + std::to_string(lineno) +
                         ": bad number '" + field + "'");
      }
    }
    if (row.size() < min_cols || row.size() > max_cols) {
      throw ParseError(std::string(what) + " line " + std::to_string(lineno) +
                       ": unexpected column count");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

inline LossHistory parse_loss_history_csv(const std::string& text) {
  LossHistory h;
  for (const auto& row : detail::parse_series_csv(text, 2, 3, "loss history csv")) {
    h.train_loss.push_back(row[1]);
    if (row.size() == 3) h.val_loss.push_back(row[2]);
  }
  return h;
}

inline FitnessHistory parse_fitness_history_csv(const std::string& text) {
  FitnessHistory h;
  for (const auto& row : detail::parse_series_csv(text, 3, 3, "fitness history csv")) {
    h.best.push_back(row[1]);
    h.mean.push_back(row[2]);
  }
  return h;
}

}  // namespace rbflow
