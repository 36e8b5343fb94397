#pragma once

// Slow reference implementations the library is checked against. They share
// no code with src/.

#include "grid/graph.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using EdgeSet = std::set<std::pair<int, int>>;

inline std::vector<grid::Variable> make_vars(int n, grid::VariableKind kind = grid::VariableKind::Mediator) {
  std::vector<grid::Variable> v;
  for (int i = 0; i < n; ++i) v.push_back({"V" + std::to_string(i), kind, "", {-1e9, 1e9}});
  return v;
}

/// Every off-diagonal digraph on n nodes, as edge sets, indexed by bitmask.
inline std::vector<EdgeSet> all_digraphs(int n) {
  std::vector<std::pair<int, int>> slots;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) slots.emplace_back(i, j);
  std::vector<EdgeSet> out;
  for (unsigned mask = 0; mask < (1u << slots.size()); ++mask) {
    EdgeSet s;
    for (std::size_t k = 0; k < slots.size(); ++k)
      if (mask & (1u << k)) s.insert(slots[k]);
    out.push_back(s);
  }
  return out;
}

inline grid::DirectedGraph to_graph(const EdgeSet& s, int n) {
  std::vector<grid::Edge> e;
  for (auto [a, b] : s) e.push_back({a, b});
  return grid::DirectedGraph(make_vars(n), e);
}

/// Acyclic iff some node ordering puts every edge forward.
inline bool acyclic_by_permutation(const EdgeSet& s, int n) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  do {
    std::vector<int> pos(n);
    for (int k = 0; k < n; ++k) pos[order[k]] = k;
    if (std::all_of(s.begin(), s.end(), [&](auto e) { return pos[e.first] < pos[e.second]; })) return true;
  } while (std::next_permutation(order.begin(), order.end()));
  return false;
}

/// |E1 Δ E2| over directed edges.
inline int shd(const EdgeSet& truth, const EdgeSet& est) {
  int d = 0;
  for (const auto& e : truth) d += !est.count(e);
  for (const auto& e : est) d += !truth.count(e);
  return d;
}

struct Confusion {
  int tp = 0, fp = 0, fn = 0, tn = 0;
};

inline Confusion confusion(const EdgeSet& truth, const EdgeSet& est, int n) {
  Confusion c;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const bool t = truth.count({i, j}), e = est.count({i, j});
      c.tp += t && e;
      c.fp += !t && e;
      c.fn += t && !e;
      c.tn += !t && !e;
    }
  return c;
}

/// Partial correlation from the residuals of two least-squares fits.
inline double partial_corr_by_regression(const Eigen::MatrixXd& x, int i, int j, const std::vector<int>& cond) {
  const int n = static_cast<int>(x.rows());
  Eigen::MatrixXd z(n, static_cast<int>(cond.size()) + 1);
  z.col(0).setOnes();
  for (std::size_t k = 0; k < cond.size(); ++k) z.col(static_cast<int>(k) + 1) = x.col(cond[k]);
  auto resid = [&](int c) -> Eigen::VectorXd {
    Eigen::VectorXd y = x.col(c);
    Eigen::VectorXd beta = z.colPivHouseholderQr().solve(y);
    return y - z * beta;
  };
  const Eigen::VectorXd ri = resid(i), rj = resid(j);
  return ri.dot(rj) / std::sqrt(ri.squaredNorm() * rj.squaredNorm());
}

/// Linear-Gaussian samples from a weighted DAG given in topological order
/// (w(i, j) != 0 only for i < j).
inline Eigen::MatrixXd sample_linear_sem(const Eigen::MatrixXd& w, int n, std::mt19937_64& rng) {
  const int p = static_cast<int>(w.rows());
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd x(n, p);
  for (int r = 0; r < n; ++r)
    for (int j = 0; j < p; ++j) {
      double v = z(rng);
      for (int i = 0; i < j; ++i) v += w(i, j) * x(r, i);
      x(r, j) = v;
    }
  return x;
}

/// tr(exp(A)) - n by truncated power series, for small matrices.
inline double trace_exp_series(const Eigen::MatrixXd& a, int terms = 60) {
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  double tr = 0.0;
  for (int k = 1; k <= terms; ++k) {
    term = term * a / static_cast<double>(k);
    tr += term.trace();
  }
  return tr;
}

}  // namespace oracle
