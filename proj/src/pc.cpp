#include "grid/pc.hpp"

#include "grid/errors.hpp"
#include "grid/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace grid {

void PcConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("PC alpha must lie in (0, 1)");
  if (max_cond_set && *max_cond_set < 0) throw InvalidArgument("max_cond_set must be >= 0");
}

int PcConfig::effective_max_cond_set(int n_variables) const {
  if (max_cond_set) return *max_cond_set;
  return n_variables <= 6 ? std::max(0, n_variables - 2) : 3;
}

FisherZTest::FisherZTest(const Dataset& data, double alpha)
    : corr_(linalg::weighted_correlation(data.values, data.weights)),
      n_eff_(linalg::effective_sample_size(data.weights)),
      alpha_(alpha) {}

FisherZTest::FisherZTest(Eigen::MatrixXd correlation, double n_eff, double alpha)
    : corr_(std::move(correlation)), n_eff_(n_eff), alpha_(alpha) {}

CITestResult FisherZTest::operator()(int i, int j, std::span<const int> cond) const {
  const double dof = n_eff_ - static_cast<double>(cond.size()) - 3.0;
  if (!(dof > 0.0)) throw InvalidArgument("effective sample size too small for the conditioning set");
  const auto r = linalg::partial_correlation(corr_, i, j, cond);
  if (!r) throw SingularSubmatrix("correlation submatrix is singular (collinear data)");
  CITestResult out;
  out.i = i;
  out.j = j;
  out.conditioning_set.assign(cond.begin(), cond.end());
  out.partial_corr = *r;
  out.z_stat = std::sqrt(dof) * std::abs(std::atanh(*r));
  out.p_value = std::erfc(out.z_stat / std::sqrt(2.0));
  out.independent = out.p_value > alpha_;
  return out;
}

CITestResult fisher_z_test(const Dataset& data, int i, int j, std::span<const int> cond, double alpha) {
  return FisherZTest(data, alpha)(i, j, cond);
}

const std::vector<int>* Skeleton::sepset(int i, int j) const {
  auto it = sepsets.find({std::min(i, j), std::max(i, j)});
  return it == sepsets.end() ? nullptr : &it->second;
}

namespace {

// Calls `f` with every size-k subset of `pool` in lexicographic order.
template <typename F>
void for_each_subset(const std::vector<int>& pool, int k, F&& f) {
  const int n = static_cast<int>(pool.size());
  if (k > n) return;
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<int> subset(static_cast<std::size_t>(k));
  while (true) {
    for (int a = 0; a < k; ++a) subset[static_cast<std::size_t>(a)] = pool[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
    f(std::span<const int>(subset));
    int a = k - 1;
    while (a >= 0 && idx[static_cast<std::size_t>(a)] == n - k + a) --a;
    if (a < 0) return;
    ++idx[static_cast<std::size_t>(a)];
    for (int b = a + 1; b < k; ++b) idx[static_cast<std::size_t>(b)] = idx[static_cast<std::size_t>(b - 1)] + 1;
  }
}

std::vector<int> neighbours(const AdjacencyMatrix& adj, int i, int except) {
  std::vector<int> out;
  for (int k = 0; k < adj.rows(); ++k)
    if (k != i && k != except && adj(i, k)) out.push_back(k);
  return out;
}

}  // namespace

Skeleton pc_skeleton(const Dataset& data, const PcConfig& config) {
  config.validate();
  const int n = data.cols();
  if (n < 2) throw InvalidArgument("PC needs at least two variables");
  const FisherZTest test(data, config.alpha);
  const int max_level = config.effective_max_cond_set(n);

  Skeleton sk;
  sk.adjacency = AdjacencyMatrix::Ones(n, n);
  sk.adjacency.diagonal().setZero();

  for (int level = 0; level <= max_level; ++level) {
    const AdjacencyMatrix frozen = sk.adjacency;
    bool any_candidate = false;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        if (!sk.adjacency(i, j)) continue;
        const AdjacencyMatrix& view = config.stable ? frozen : sk.adjacency;
        // Among all separating sets of this level keep the one with the
        // largest p-value, so the choice does not depend on test order.
        std::optional<CITestResult> best;
        auto consider = [&](std::span<const int> cond) {
          any_candidate = true;
          CITestResult r = test(i, j, cond);
          sk.tests.push_back(r);
          if (r.independent && (!best || r.p_value > best->p_value)) best = std::move(r);
        };
        const auto from_i = neighbours(view, i, j);
        const auto from_j = neighbours(view, j, i);
        for_each_subset(from_i, level, consider);
        if (level > 0) {
          for_each_subset(from_j, level, [&](std::span<const int> cond) {
            std::vector<int> sorted(cond.begin(), cond.end());
            if (std::includes(from_i.begin(), from_i.end(), sorted.begin(), sorted.end())) return;
            consider(cond);
          });
        }
        if (best) {
          sk.adjacency(i, j) = sk.adjacency(j, i) = 0;
          sk.sepsets[{i, j}] = best->conditioning_set;
          sk.sepset_p[{i, j}] = best->p_value;
        }
      }
    if (!any_candidate) break;
  }
  return sk;
}

namespace {

// Partially directed graph: m(a,b) && m(b,a) is undirected, m(a,b) alone is a→b.
struct Pdag {
  AdjacencyMatrix m;

  int size() const { return static_cast<int>(m.rows()); }
  bool adjacent(int a, int b) const { return m(a, b) || m(b, a); }
  bool undirected(int a, int b) const { return m(a, b) && m(b, a); }
  bool directed(int a, int b) const { return m(a, b) && !m(b, a); }

  AdjacencyMatrix directed_part() const {
    AdjacencyMatrix d = AdjacencyMatrix::Zero(size(), size());
    for (int a = 0; a < size(); ++a)
      for (int b = 0; b < size(); ++b)
        if (directed(a, b)) d(a, b) = 1;
    return d;
  }
  bool creates_cycle(int a, int b) const { return reachable(directed_part(), b, a); }

  /// Orients an undirected a−b as a→b unless that closes a directed cycle.
  bool orient(int a, int b) {
    if (!undirected(a, b) || creates_cycle(a, b)) return false;
    m(b, a) = 0;
    return true;
  }
  void remove(int a, int b) { m(a, b) = m(b, a) = 0; }
};

int tier(VariableKind k) {
  switch (k) {
    case VariableKind::Input: return 0;
    case VariableKind::Mediator: return 1;
    case VariableKind::Output: return 2;
  }
  return 0;
}

void apply_background(Pdag& g, const std::vector<Variable>& vars, const StructuralConstraints& c) {
  const int n = g.size();
  auto index = [&](const std::string& name) -> std::optional<int> {
    for (int i = 0; i < n; ++i)
      if (vars[static_cast<std::size_t>(i)].name == name) return i;
    return std::nullopt;
  };
  if (c.forbid_output_sources) {
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        if (!g.adjacent(a, b)) continue;
        const bool oa = vars[static_cast<std::size_t>(a)].kind == VariableKind::Output;
        const bool ob = vars[static_cast<std::size_t>(b)].kind == VariableKind::Output;
        if (oa && ob) g.remove(a, b);
        else if (oa) g.m(a, b) = 0;
        else if (ob) g.m(b, a) = 0;
      }
  }
  for (const auto& [s, t] : c.required_orientations) {
    auto si = index(s), ti = index(t);
    if (si && ti && g.adjacent(*si, *ti)) {
      g.m(*si, *ti) = 1;
      g.m(*ti, *si) = 0;
    }
  }
  for (const auto& [s, t] : c.forbidden_edges) {
    auto si = index(s), ti = index(t);
    if (!si || !ti || !g.m(*si, *ti)) continue;
    if (g.undirected(*si, *ti)) g.m(*si, *ti) = 0;
    else g.remove(*si, *ti);
  }
}

void orient_colliders(Pdag& g, const Skeleton& sk, const PcConfig& config) {
  struct Collider {
    int i, k, j;
    double p;
  };
  std::vector<Collider> found;
  const int n = g.size();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (sk.adjacent(i, j)) continue;
      const auto* sep = sk.sepset(i, j);
      const auto pit = sk.sepset_p.find({i, j});
      const double p = pit == sk.sepset_p.end() ? 1.0 : pit->second;
      for (int k = 0; k < n; ++k) {
        if (k == i || k == j || !sk.adjacent(i, k) || !sk.adjacent(j, k)) continue;
        if (sep && std::find(sep->begin(), sep->end(), k) != sep->end()) continue;
        found.push_back({i, k, j, p});
      }
    }
  if (!config.collider_priority)
    std::stable_sort(found.begin(), found.end(), [](const Collider& a, const Collider& b) { return a.p > b.p; });
  for (const auto& c : found) {
    g.orient(c.i, c.k);
    g.orient(c.j, c.k);
  }
}

void apply_meek(Pdag& g) {
  const int n = g.size();
  bool changed = true;
  while (changed) {
    changed = false;
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        if (b == c || !g.undirected(b, c)) continue;
        bool fire = false;
        for (int a = 0; a < n && !fire; ++a) {
          if (a == b || a == c) continue;
          // R1: a→b−c with a, c non-adjacent.
          if (g.directed(a, b) && !g.adjacent(a, c)) fire = true;
          // R2: b→a→c with b−c.
          else if (g.directed(b, a) && g.directed(a, c)) fire = true;
        }
        // R3: b−a→c and b−d→c with a, d non-adjacent.
        for (int a = 0; a < n && !fire; ++a) {
          if (a == b || a == c || !g.undirected(b, a) || !g.directed(a, c)) continue;
          for (int d = a + 1; d < n && !fire; ++d) {
            if (d == b || d == c || !g.undirected(b, d) || !g.directed(d, c)) continue;
            if (!g.adjacent(a, d)) fire = true;
          }
        }
        if (fire && g.orient(b, c)) changed = true;
      }
  }
}

}  // namespace

DirectedGraph orient_edges(const std::vector<Variable>& variables, const Skeleton& skeleton,
                           const StructuralConstraints& constraints, const PcConfig& config) {
  const int n = static_cast<int>(variables.size());
  if (skeleton.adjacency.rows() != n) throw NodeMismatch("skeleton size does not match the variable list");
  Pdag g{skeleton.adjacency};
  apply_background(g, variables, constraints);
  orient_colliders(g, skeleton, config);
  apply_meek(g);

  // Remaining undirected edges: follow the Input < Mediator < Output order,
  // then fall back to the lower index as source.
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (!g.undirected(a, b)) continue;
      const int ta = tier(variables[static_cast<std::size_t>(a)].kind);
      const int tb = tier(variables[static_cast<std::size_t>(b)].kind);
      if (ta < tb && !g.orient(a, b)) g.orient(b, a);
    }
  apply_meek(g);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      if (!g.undirected(a, b)) continue;
      if (!g.orient(a, b)) g.orient(b, a);
      apply_meek(g);
    }

  DirectedGraph out(variables, g.directed_part());
  out = apply_constraints(out, constraints);
  // Constraint flips can in principle close a cycle; cut it at the last edge.
  AdjacencyMatrix a = out.adjacency();
  for (auto cycle = find_cycle(a); !cycle.empty(); cycle = find_cycle(a)) a(cycle.back().source, cycle.back().target) = 0;
  return out.with_adjacency(std::move(a));
}

PcResult run_pc(const Dataset& data, const PcConfig& config, const StructuralConstraints& constraints) {
  Skeleton sk = pc_skeleton(data, config);
  DirectedGraph g = orient_edges(data.variables, sk, constraints, config);
  return {std::move(g), std::move(sk)};
}

std::string ci_tests_to_csv(const std::vector<Variable>& variables, const std::vector<CITestResult>& tests) {
  std::ostringstream os;
  os << "i,j,conditioning_set,partial_corr,z_stat,p_value,independent\n";
  for (const auto& t : tests) {
    os << variables.at(static_cast<std::size_t>(t.i)).name << ',' << variables.at(static_cast<std::size_t>(t.j)).name
       << ',';
    for (std::size_t k = 0; k < t.conditioning_set.size(); ++k)
      os << (k ? ";" : "") << variables.at(static_cast<std::size_t>(t.conditioning_set[k])).name;
    os << ',' << format_number(t.partial_corr) << ',' << format_number(t.z_stat) << ','
       << format_number(t.p_value) << ',' << (t.independent ? "true" : "false") << '\n';
  }
  return os.str();
}

}  // namespace grid
