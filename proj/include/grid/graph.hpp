#pragma once

#include <Eigen/Core>

#include <compare>
#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace grid {

enum class VariableKind { Input, Mediator, Output };

std::string_view to_string(VariableKind kind);
VariableKind variable_kind_from_string(std::string_view text);

/// Closed real interval in the variable's own units.
struct Bounds {
  double low = 0.0;
  double high = 1.0;

  bool contains(double x) const { return x >= low && x <= high; }
  double clamp(double x) const { return x < low ? low : (x > high ? high : x); }
  double width() const { return high - low; }
  bool operator==(const Bounds&) const = default;
};

struct Variable {
  std::string name;
  VariableKind kind = VariableKind::Input;
  std::string unit;
  Bounds bounds;

  bool intervenable() const { return kind != VariableKind::Output; }
  bool operator==(const Variable&) const = default;
};

/// Directed edge between two node indices of a graph.
struct Edge {
  int source = 0;
  int target = 0;

  auto operator<=>(const Edge&) const = default;
};

using AdjacencyMatrix = Eigen::MatrixXi;
using NamedEdge = std::pair<std::string, std::string>;

/// Immutable directed graph over an ordered list of variables.
///
/// The adjacency matrix is the storage; `edges()` is derived from it, so the
/// two views cannot disagree. Self-loops are rejected at construction. Cycles
/// are representable; callers that need a DAG check `is_acyclic`.
class DirectedGraph {
 public:
  DirectedGraph() = default;
  explicit DirectedGraph(std::vector<Variable> nodes);
  DirectedGraph(std::vector<Variable> nodes, const std::vector<Edge>& edges);
  DirectedGraph(std::vector<Variable> nodes, AdjacencyMatrix adjacency);

  static DirectedGraph from_named_edges(std::vector<Variable> nodes,
                                        const std::vector<NamedEdge>& edges);

  const std::vector<Variable>& nodes() const { return *nodes_; }
  const Variable& node(int i) const { return (*nodes_)[static_cast<std::size_t>(i)]; }
  int size() const { return static_cast<int>(nodes_->size()); }
  const AdjacencyMatrix& adjacency() const { return adjacency_; }

  bool has_edge(int source, int target) const { return adjacency_(source, target) != 0; }
  bool has_edge(const Edge& e) const { return has_edge(e.source, e.target); }
  int edge_count() const { return adjacency_.sum(); }

  /// Edges in row-major (source, target) order.
  std::vector<Edge> edges() const;
  std::vector<NamedEdge> named_edges() const;
  std::vector<int> parents(int node) const;
  std::vector<int> children(int node) const;

  std::optional<int> index_of(std::string_view name) const;
  int require_index(std::string_view name) const;
  std::vector<std::string> node_names() const;

  DirectedGraph with_edge(const Edge& e) const;
  DirectedGraph without_edge(const Edge& e) const;
  DirectedGraph with_adjacency(AdjacencyMatrix adjacency) const;
  /// Same nodes, no edges.
  DirectedGraph empty_copy() const;

  bool same_nodes(const DirectedGraph& other) const;
  bool operator==(const DirectedGraph& other) const;

 private:
  void validate() const;

  std::shared_ptr<const std::vector<Variable>> nodes_ = std::make_shared<const std::vector<Variable>>();
  AdjacencyMatrix adjacency_ = AdjacencyMatrix::Zero(0, 0);
};

/// Domain constraints on admissible edges, expressed by variable name.
struct StructuralConstraints {
  bool forbid_output_sources = true;
  std::set<NamedEdge> forbidden_edges;
  std::set<NamedEdge> required_orientations;

  /// Throws InvalidArgument when forbidden and required sets overlap.
  void validate() const;
  /// True when the edge survives the output-source and forbidden-edge rules.
  bool admits(const DirectedGraph& g, const Edge& e) const;
};

bool is_acyclic(const DirectedGraph& g);
bool is_acyclic(const AdjacencyMatrix& adjacency);
std::optional<std::vector<int>> topological_order(const AdjacencyMatrix& adjacency);
/// Edges of one directed cycle in walk order, or empty when acyclic.
std::vector<Edge> find_cycle(const AdjacencyMatrix& adjacency);
/// True when `to` is reachable from `from` along directed edges.
bool reachable(const AdjacencyMatrix& adjacency, int from, int to);

DirectedGraph apply_constraints(const DirectedGraph& g, const StructuralConstraints& c);

/// Element-wise L1 distance between adjacency matrices (a reversal counts 2).
int shd(const DirectedGraph& truth, const DirectedGraph& estimate);

struct EdgeConfusion {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  int tn = 0;

  double precision() const;
  double recall() const;
  double f1() const;
  bool operator==(const EdgeConfusion&) const = default;
};

/// Directed-edge confusion counts over all n(n-1) ordered pairs.
EdgeConfusion edge_confusion(const DirectedGraph& truth, const DirectedGraph& estimate);

/// Edges of `estimate` absent from `truth`.
std::vector<Edge> false_positive_edges(const DirectedGraph& truth, const DirectedGraph& estimate);

}  // namespace grid
