#include "grid/graph.hpp"

#include "grid/errors.hpp"

#include <algorithm>
#include <unordered_set>

namespace grid {

std::string_view to_string(VariableKind kind) {
  switch (kind) {
    case VariableKind::Input: return "input";
    case VariableKind::Mediator: return "mediator";
    case VariableKind::Output: return "output";
  }
  return "input";
}

VariableKind variable_kind_from_string(std::string_view text) {
  if (text == "input" || text == "Input") return VariableKind::Input;
  if (text == "mediator" || text == "Mediator") return VariableKind::Mediator;
  if (text == "output" || text == "Output") return VariableKind::Output;
  throw InvalidArgument("unknown variable kind '" + std::string(text) + "'");
}

DirectedGraph::DirectedGraph(std::vector<Variable> nodes)
    : nodes_(std::make_shared<const std::vector<Variable>>(std::move(nodes))) {
  const auto n = static_cast<Eigen::Index>(nodes_->size());
  adjacency_ = AdjacencyMatrix::Zero(n, n);
  validate();
}

DirectedGraph::DirectedGraph(std::vector<Variable> nodes, const std::vector<Edge>& edges)
    : DirectedGraph(std::move(nodes)) {
  for (const auto& e : edges) {
    if (e.source < 0 || e.target < 0 || e.source >= size() || e.target >= size())
      throw InvalidArgument("edge index out of range");
    adjacency_(e.source, e.target) = 1;
  }
  validate();
}

DirectedGraph::DirectedGraph(std::vector<Variable> nodes, AdjacencyMatrix adjacency)
    : nodes_(std::make_shared<const std::vector<Variable>>(std::move(nodes))),
      adjacency_(std::move(adjacency)) {
  validate();
}

DirectedGraph DirectedGraph::from_named_edges(std::vector<Variable> nodes,
                                              const std::vector<NamedEdge>& edges) {
  DirectedGraph g(std::move(nodes));
  AdjacencyMatrix a = g.adjacency_;
  for (const auto& [s, t] : edges) a(g.require_index(s), g.require_index(t)) = 1;
  return g.with_adjacency(std::move(a));
}

void DirectedGraph::validate() const {
  const auto n = static_cast<Eigen::Index>(nodes_->size());
  if (adjacency_.rows() != n || adjacency_.cols() != n)
    throw InvalidArgument("adjacency shape does not match node count");
  std::unordered_set<std::string> seen;
  for (const auto& v : *nodes_) {
    if (v.name.empty()) throw InvalidArgument("variable with empty name");
    if (!seen.insert(v.name).second) throw InvalidArgument("duplicate variable name '" + v.name + "'");
    if (!(v.bounds.low < v.bounds.high))
      throw InvalidArgument("variable '" + v.name + "' has empty bounds");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (adjacency_(i, i) != 0) throw InvalidArgument("self-loop on '" + (*nodes_)[i].name + "'");
    for (Eigen::Index j = 0; j < n; ++j)
      if (adjacency_(i, j) != 0 && adjacency_(i, j) != 1)
        throw InvalidArgument("adjacency entries must be binary");
  }
}

std::vector<Edge> DirectedGraph::edges() const {
  std::vector<Edge> out;
  for (int i = 0; i < size(); ++i)
    for (int j = 0; j < size(); ++j)
      if (adjacency_(i, j)) out.push_back({i, j});
  return out;
}

std::vector<NamedEdge> DirectedGraph::named_edges() const {
  std::vector<NamedEdge> out;
  for (const auto& e : edges()) out.emplace_back(node(e.source).name, node(e.target).name);
  return out;
}

std::vector<int> DirectedGraph::parents(int node) const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (adjacency_(i, node)) out.push_back(i);
  return out;
}

std::vector<int> DirectedGraph::children(int node) const {
  std::vector<int> out;
  for (int j = 0; j < size(); ++j)
    if (adjacency_(node, j)) out.push_back(j);
  return out;
}

std::optional<int> DirectedGraph::index_of(std::string_view name) const {
  for (int i = 0; i < size(); ++i)
    if (node(i).name == name) return i;
  return std::nullopt;
}

int DirectedGraph::require_index(std::string_view name) const {
  if (auto i = index_of(name)) return *i;
  throw NodeMismatch("unknown node '" + std::string(name) + "'");
}

std::vector<std::string> DirectedGraph::node_names() const {
  std::vector<std::string> out;
  out.reserve(nodes_->size());
  for (const auto& v : *nodes_) out.push_back(v.name);
  return out;
}

DirectedGraph DirectedGraph::with_edge(const Edge& e) const {
  AdjacencyMatrix a = adjacency_;
  a(e.source, e.target) = 1;
  return with_adjacency(std::move(a));
}

DirectedGraph DirectedGraph::without_edge(const Edge& e) const {
  AdjacencyMatrix a = adjacency_;
  a(e.source, e.target) = 0;
  return with_adjacency(std::move(a));
}

DirectedGraph DirectedGraph::with_adjacency(AdjacencyMatrix adjacency) const {
  DirectedGraph g;
  g.nodes_ = nodes_;
  g.adjacency_ = std::move(adjacency);
  g.validate();
  return g;
}

DirectedGraph DirectedGraph::empty_copy() const {
  return with_adjacency(AdjacencyMatrix::Zero(size(), size()));
}

bool DirectedGraph::same_nodes(const DirectedGraph& other) const {
  if (nodes_ == other.nodes_) return true;
  if (size() != other.size()) return false;
  for (int i = 0; i < size(); ++i)
    if (node(i).name != other.node(i).name) return false;
  return true;
}

bool DirectedGraph::operator==(const DirectedGraph& other) const {
  return same_nodes(other) && adjacency_ == other.adjacency_;
}

void StructuralConstraints::validate() const {
  for (const auto& e : forbidden_edges)
    if (required_orientations.count(e))
      throw InvalidArgument("edge " + e.first + "->" + e.second + " is both forbidden and required");
}

bool StructuralConstraints::admits(const DirectedGraph& g, const Edge& e) const {
  if (forbid_output_sources && g.node(e.source).kind == VariableKind::Output) return false;
  return !forbidden_edges.count({g.node(e.source).name, g.node(e.target).name});
}

std::optional<std::vector<int>> topological_order(const AdjacencyMatrix& adjacency) {
  const int n = static_cast<int>(adjacency.rows());
  std::vector<int> indegree(n, 0);
  for (int j = 0; j < n; ++j) indegree[j] = adjacency.col(j).sum();
  std::vector<int> order;
  order.reserve(n);
  // Lowest-index ready node first keeps the order deterministic.
  std::set<int> ready;
  for (int i = 0; i < n; ++i)
    if (indegree[i] == 0) ready.insert(i);
  while (!ready.empty()) {
    const int u = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(u);
    for (int v = 0; v < n; ++v)
      if (adjacency(u, v) && --indegree[v] == 0) ready.insert(v);
  }
  if (static_cast<int>(order.size()) != n) return std::nullopt;
  return order;
}

bool is_acyclic(const AdjacencyMatrix& adjacency) { return topological_order(adjacency).has_value(); }

bool is_acyclic(const DirectedGraph& g) { return is_acyclic(g.adjacency()); }

std::vector<Edge> find_cycle(const AdjacencyMatrix& adjacency) {
  const int n = static_cast<int>(adjacency.rows());
  enum Color { White, Grey, Black };
  std::vector<Color> color(n, White);
  std::vector<int> parent(n, -1);

  // Iterative DFS; on a back edge u->v, walk parents from u back to v.
  for (int root = 0; root < n; ++root) {
    if (color[root] != White) continue;
    std::vector<std::pair<int, int>> stack{{root, 0}};
    color[root] = Grey;
    while (!stack.empty()) {
      auto& [u, next] = stack.back();
      if (next >= n) {
        color[u] = Black;
        stack.pop_back();
        continue;
      }
      const int v = next++;
      if (!adjacency(u, v)) continue;
      if (color[v] == Grey) {
        std::vector<int> path{v};
        for (int w = u; w != v; w = parent[w]) path.push_back(w);
        std::reverse(path.begin() + 1, path.end());
        std::vector<Edge> cycle;
        for (std::size_t k = 0; k < path.size(); ++k)
          cycle.push_back({path[k], path[(k + 1) % path.size()]});
        return cycle;
      }
      if (color[v] == White) {
        color[v] = Grey;
        parent[v] = u;
        stack.emplace_back(v, 0);
      }
    }
  }
  return {};
}

bool reachable(const AdjacencyMatrix& adjacency, int from, int to) {
  const int n = static_cast<int>(adjacency.rows());
  std::vector<char> seen(n, 0);
  std::vector<int> stack{from};
  seen[from] = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    if (u == to) return true;
    for (int v = 0; v < n; ++v)
      if (adjacency(u, v) && !seen[v]) {
        seen[v] = 1;
        stack.push_back(v);
      }
  }
  return false;
}

DirectedGraph apply_constraints(const DirectedGraph& g, const StructuralConstraints& c) {
  c.validate();
  AdjacencyMatrix a = g.adjacency();
  for (int i = 0; i < g.size(); ++i) {
    if (c.forbid_output_sources && g.node(i).kind == VariableKind::Output) a.row(i).setZero();
  }
  for (const auto& [s, t] : c.forbidden_edges) {
    auto si = g.index_of(s);
    auto ti = g.index_of(t);
    if (si && ti) a(*si, *ti) = 0;
  }
  for (const auto& [s, t] : c.required_orientations) {
    auto si = g.index_of(s);
    auto ti = g.index_of(t);
    if (!si || !ti || !a(*ti, *si)) continue;
    if (c.forbid_output_sources && g.node(*si).kind == VariableKind::Output)
      throw ConstraintConflict("required orientation " + s + "->" + t + " starts at an output");
    a(*ti, *si) = 0;
    if (reachable(a, *ti, *si))
      throw ConstraintConflict("required orientation " + s + "->" + t + " would create a cycle");
    a(*si, *ti) = 1;
  }
  return g.with_adjacency(std::move(a));
}

namespace {
void require_same_nodes(const DirectedGraph& a, const DirectedGraph& b) {
  if (!a.same_nodes(b)) throw NodeMismatch("graphs are defined over different node lists");
}
}  // namespace

int shd(const DirectedGraph& truth, const DirectedGraph& estimate) {
  require_same_nodes(truth, estimate);
  return (truth.adjacency() - estimate.adjacency()).cwiseAbs().sum();
}

double EdgeConfusion::precision() const { return tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0; }
double EdgeConfusion::recall() const { return tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0; }
double EdgeConfusion::f1() const {
  const double p = precision();
  const double r = recall();
  return p + r > 0 ? 2.0 * p * r / (p + r) : 0.0;
}

EdgeConfusion edge_confusion(const DirectedGraph& truth, const DirectedGraph& estimate) {
  require_same_nodes(truth, estimate);
  EdgeConfusion c;
  const auto& t = truth.adjacency();
  const auto& e = estimate.adjacency();
  for (int i = 0; i < truth.size(); ++i)
    for (int j = 0; j < truth.size(); ++j) {
      if (i == j) continue;
      if (t(i, j) && e(i, j)) ++c.tp;
      else if (!t(i, j) && e(i, j)) ++c.fp;
      else if (t(i, j) && !e(i, j)) ++c.fn;
      else ++c.tn;
    }
  return c;
}

std::vector<Edge> false_positive_edges(const DirectedGraph& truth, const DirectedGraph& estimate) {
  require_same_nodes(truth, estimate);
  std::vector<Edge> out;
  for (const auto& e : estimate.edges())
    if (!truth.has_edge(e)) out.push_back(e);
  return out;
}

}  // namespace grid
