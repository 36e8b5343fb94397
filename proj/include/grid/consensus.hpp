#pragma once

#include "grid/graph.hpp"

#include <array>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

namespace grid {

enum class Generator { PC = 0, NSEM = 1, LLM = 2 };
inline constexpr std::array<Generator, 3> kAllGenerators{Generator::PC, Generator::NSEM, Generator::LLM};

std::string_view to_string(Generator g);
Generator generator_from_string(std::string_view text);

enum class EdgeStatus { Untested, Validated, Refuted };

std::string_view to_string(EdgeStatus s);

struct ScoredEdge {
  Edge edge;
  double confidence = 0.0;
  std::array<bool, 3> supporters{};
  EdgeStatus status = EdgeStatus::Untested;

  int support_count() const;
  bool supported_by(Generator g) const { return supporters[static_cast<std::size_t>(g)]; }
};

using EdgeHistory = std::map<Edge, EdgeStatus>;

struct UnionGraph {
  DirectedGraph nodes;  // node list only; edges live in `scored_edges`
  /// Row-major (source, target) order.
  std::vector<ScoredEdge> scored_edges;

  DirectedGraph graph() const;
  const ScoredEdge* find(const Edge& e) const;
};

/// Candidate graphs keyed by the generator that produced them.
using Candidates = std::vector<std::pair<Generator, DirectedGraph>>;

/// c(e) = 1 for previously validated edges, |supporters|/3 otherwise;
/// previously refuted edges are dropped.
UnionGraph merge(const Candidates& candidates, const EdgeHistory& history);
UnionGraph merge(const DirectedGraph& g1, const DirectedGraph& g2, const DirectedGraph& g3,
                 const EdgeHistory& history);

/// Untested edges below full consensus, ascending confidence, ties by
/// (source, target) index.
std::vector<ScoredEdge> rank_for_testing(const UnionGraph& u);

}  // namespace grid
