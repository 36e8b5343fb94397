#include "grid/dataset.hpp"

#include "grid/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace grid {

std::string format_number(double x) {
  if (x == 0.0) return "0";
  char buf[64];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, x);
    if (std::strtod(buf, nullptr) == x) return buf;
  }
  return buf;
}

std::string Regime::to_string() const {
  if (!variable) return "obs";
  return "do:" + *variable + "=" + format_number(value);
}

Regime Regime::parse(std::string_view text) {
  if (text == "obs" || text.empty()) return observational();
  if (text.substr(0, 3) != "do:") throw InvalidArgument("bad regime '" + std::string(text) + "'");
  const auto eq = text.rfind('=');
  if (eq == std::string_view::npos || eq < 4) throw InvalidArgument("bad regime '" + std::string(text) + "'");
  const std::string number(text.substr(eq + 1));
  char* end = nullptr;
  const double v = std::strtod(number.c_str(), &end);
  if (end == number.c_str()) throw InvalidArgument("bad regime value in '" + std::string(text) + "'");
  return intervention(std::string(text.substr(3, eq - 3)), v);
}

Dataset::Dataset(std::vector<Variable> vars)
    : variables(std::move(vars)),
      values(Eigen::MatrixXd::Zero(0, static_cast<Eigen::Index>(variables.size()))),
      weights(Eigen::VectorXd::Zero(0)) {}

Dataset Dataset::from_samples(std::vector<Variable> vars, const std::vector<Sample>& samples) {
  Dataset d(std::move(vars));
  d.append(samples);
  return d;
}

void Dataset::append(const std::vector<Sample>& samples) {
  if (samples.empty()) return;
  const Eigen::Index start = values.rows();
  const auto n = static_cast<Eigen::Index>(samples.size());
  values.conservativeResize(start + n, cols());
  weights.conservativeResize(start + n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& s = samples[static_cast<std::size_t>(r)];
    if (s.values.size() != cols()) throw InvalidArgument("sample width does not match variable count");
    if (!(s.weight > 0.0)) throw InvalidArgument("sample weight must be positive");
    values.row(start + r) = s.values.transpose();
    weights(start + r) = s.weight;
    regimes.push_back(s.regime);
  }
}

std::vector<Sample> Dataset::samples() const {
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(rows()));
  for (int r = 0; r < rows(); ++r) out.push_back({values.row(r).transpose(), weights(r), regimes[r]});
  return out;
}

double Dataset::observational_mean(int column) const {
  double sum = 0.0;
  int count = 0;
  for (int r = 0; r < rows(); ++r)
    if (!regimes[r].interventional()) {
      sum += values(r, column);
      ++count;
    }
  if (count == 0) return rows() > 0 ? values.col(column).mean() : 0.0;
  return sum / count;
}

Dataset Dataset::permuted_columns(const std::vector<int>& order) const {
  Dataset d;
  for (int c : order) d.variables.push_back(variables[static_cast<std::size_t>(c)]);
  d.values.resize(values.rows(), static_cast<Eigen::Index>(order.size()));
  for (std::size_t k = 0; k < order.size(); ++k) d.values.col(static_cast<Eigen::Index>(k)) = values.col(order[k]);
  d.weights = weights;
  d.regimes = regimes;
  return d;
}

std::string samples_to_csv(const std::vector<Variable>& variables, const std::vector<Sample>& samples) {
  std::string out;
  for (const auto& v : variables) out += v.name + ",";
  out += "weight,regime\n";
  for (const auto& s : samples) {
    for (Eigen::Index i = 0; i < s.values.size(); ++i) out += format_number(s.values(i)) + ",";
    out += format_number(s.weight) + "," + s.regime.to_string() + "\n";
  }
  return out;
}

namespace {
std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  cells.push_back(cell);
  for (auto& c : cells) {
    while (!c.empty() && c.front() == ' ') c.erase(c.begin());
    while (!c.empty() && c.back() == ' ') c.pop_back();
    if (c.size() >= 2 && c.front() == '"' && c.back() == '"') c = c.substr(1, c.size() - 2);
  }
  return cells;
}
}  // namespace

CsvTable parse_samples_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("empty CSV");
  const auto header = split_line(line);
  int weight_col = -1;
  int regime_col = -1;
  std::vector<int> value_cols;
  CsvTable table;
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    if (header[c] == "weight") weight_col = c;
    else if (header[c] == "regime") regime_col = c;
    else {
      value_cols.push_back(c);
      table.columns.push_back(header[c]);
    }
  }
  if (value_cols.empty()) throw InvalidArgument("CSV has no variable columns");

  std::vector<std::vector<double>> rows;
  std::vector<double> weights;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size())
      throw InvalidArgument("CSV line " + std::to_string(line_no) + " has the wrong number of cells");
    std::vector<double> row;
    for (int c : value_cols) {
      char* end = nullptr;
      const double v = std::strtod(cells[c].c_str(), &end);
      if (end == cells[c].c_str() || !std::isfinite(v))
        throw InvalidArgument("CSV line " + std::to_string(line_no) + ": non-numeric value '" + cells[c] + "'");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
    weights.push_back(weight_col >= 0 ? std::strtod(cells[weight_col].c_str(), nullptr) : 1.0);
    table.regimes.push_back(regime_col >= 0 ? Regime::parse(cells[regime_col]) : Regime::observational());
  }
  table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(value_cols.size()));
  table.weights.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < value_cols.size(); ++c)
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    if (!(weights[r] > 0.0)) throw InvalidArgument("CSV weights must be positive");
    table.weights(static_cast<Eigen::Index>(r)) = weights[r];
  }
  return table;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file_atomic(const std::string& path, std::string_view contents) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << contents;
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace grid
