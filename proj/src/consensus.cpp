#include "grid/consensus.hpp"

#include "grid/errors.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace grid {

std::string_view to_string(Generator g) {
  switch (g) {
    case Generator::PC: return "pc";
    case Generator::NSEM: return "nsem";
    case Generator::LLM: return "llm";
  }
  return "pc";
}

Generator generator_from_string(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "pc") return Generator::PC;
  if (lower == "nsem" || lower == "sam") return Generator::NSEM;
  if (lower == "llm") return Generator::LLM;
  throw InvalidArgument("unknown generator '" + std::string(text) + "'");
}

std::string_view to_string(EdgeStatus s) {
  switch (s) {
    case EdgeStatus::Untested: return "untested";
    case EdgeStatus::Validated: return "validated";
    case EdgeStatus::Refuted: return "refuted";
  }
  return "untested";
}

int ScoredEdge::support_count() const {
  return static_cast<int>(std::count(supporters.begin(), supporters.end(), true));
}

DirectedGraph UnionGraph::graph() const {
  AdjacencyMatrix a = AdjacencyMatrix::Zero(nodes.size(), nodes.size());
  for (const auto& s : scored_edges) a(s.edge.source, s.edge.target) = 1;
  return nodes.with_adjacency(std::move(a));
}

const ScoredEdge* UnionGraph::find(const Edge& e) const {
  for (const auto& s : scored_edges)
    if (s.edge == e) return &s;
  return nullptr;
}

UnionGraph merge(const Candidates& candidates, const EdgeHistory& history) {
  if (candidates.empty()) throw InvalidArgument("merge needs at least one candidate graph");
  const DirectedGraph& first = candidates.front().second;
  for (const auto& [g, graph] : candidates)
    if (!graph.same_nodes(first)) throw NodeMismatch("candidate graphs are defined over different node lists");

  std::map<Edge, ScoredEdge> edges;
  for (const auto& [gen, graph] : candidates)
    for (const auto& e : graph.edges()) {
      auto& s = edges[e];
      s.edge = e;
      s.supporters[static_cast<std::size_t>(gen)] = true;
    }
  for (const auto& [e, status] : history)
    if (status == EdgeStatus::Validated) edges[e].edge = e;

  UnionGraph u{first.empty_copy(), {}};
  for (auto& [e, s] : edges) {
    const auto h = history.find(e);
    const EdgeStatus status = h == history.end() ? EdgeStatus::Untested : h->second;
    if (status == EdgeStatus::Refuted) continue;
    s.status = status;
    s.confidence = status == EdgeStatus::Validated ? 1.0 : s.support_count() / 3.0;
    u.scored_edges.push_back(s);
  }
  return u;
}

UnionGraph merge(const DirectedGraph& g1, const DirectedGraph& g2, const DirectedGraph& g3,
                 const EdgeHistory& history) {
  return merge(Candidates{{Generator::PC, g1}, {Generator::NSEM, g2}, {Generator::LLM, g3}}, history);
}

std::vector<ScoredEdge> rank_for_testing(const UnionGraph& u) {
  std::vector<ScoredEdge> queue;
  for (const auto& s : u.scored_edges)
    if (s.status == EdgeStatus::Untested && s.support_count() < 3) queue.push_back(s);
  std::stable_sort(queue.begin(), queue.end(), [](const ScoredEdge& a, const ScoredEdge& b) {
    if (a.support_count() != b.support_count()) return a.support_count() < b.support_count();
    return a.edge < b.edge;
  });
  return queue;
}

}  // namespace grid
