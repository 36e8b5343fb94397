#pragma once

#include "grid/graph.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace grid {

/// Observational regime, or do(variable = value).
struct Regime {
  std::optional<std::string> variable;
  double value = 0.0;

  static Regime observational() { return {}; }
  static Regime intervention(std::string variable, double value) { return {std::move(variable), value}; }

  bool interventional() const { return variable.has_value(); }
  /// `obs` or `do:<var>=<value>`.
  std::string to_string() const;
  static Regime parse(std::string_view text);
  bool operator==(const Regime&) const = default;
};

/// One reading of every variable, positionally aligned with the variable list.
struct Sample {
  Eigen::VectorXd values;
  double weight = 1.0;
  Regime regime;
};

/// Weighted sample matrix: one row per sample, one column per variable.
struct Dataset {
  std::vector<Variable> variables;
  Eigen::MatrixXd values;
  Eigen::VectorXd weights;
  std::vector<Regime> regimes;

  Dataset() = default;
  explicit Dataset(std::vector<Variable> vars);
  static Dataset from_samples(std::vector<Variable> vars, const std::vector<Sample>& samples);

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(variables.size()); }
  void append(const std::vector<Sample>& samples);
  std::vector<Sample> samples() const;
  /// Mean of one column over observational rows (all rows when there are none).
  double observational_mean(int column) const;
  Dataset permuted_columns(const std::vector<int>& order) const;
};

/// Shortest round-trippable decimal rendering used in every text artifact.
std::string format_number(double x);

/// CSV with a header of variable names plus `weight` and `regime` columns.
std::string samples_to_csv(const std::vector<Variable>& variables, const std::vector<Sample>& samples);

struct CsvTable {
  std::vector<std::string> columns;  // variable columns only
  Eigen::MatrixXd values;
  Eigen::VectorXd weights;
  std::vector<Regime> regimes;
};

/// Parses the sample CSV format. `weight` and `regime` columns are optional.
CsvTable parse_samples_csv(std::string_view text);

std::string read_text_file(const std::string& path);
/// Writes via a temporary file and rename so readers never see partial output.
void write_text_file_atomic(const std::string& path, std::string_view contents);

}  // namespace grid
