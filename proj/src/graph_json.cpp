#include "grid/graph_json.hpp"

#include "grid/errors.hpp"

#include <set>

namespace grid {

nlohmann::json graph_to_json(const DirectedGraph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [s, t] : g.named_edges()) edges.push_back({s, t});
  return {{"nodes", g.node_names()}, {"edges", std::move(edges)}};
}

std::vector<NamedEdge> named_edges_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("edges") || !doc["edges"].is_array())
    throw SchemaViolation("graph document needs an \"edges\" array");
  std::vector<NamedEdge> out;
  for (const auto& e : doc["edges"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
      throw SchemaViolation("each edge must be a [\"source\", \"target\"] pair");
    out.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
  }
  return out;
}

DirectedGraph graph_from_json(const nlohmann::json& doc, const std::vector<Variable>& variables) {
  DirectedGraph empty(variables);
  if (doc.contains("nodes")) {
    if (!doc["nodes"].is_array()) throw SchemaViolation("\"nodes\" must be an array");
    std::set<std::string> listed;
    for (const auto& n : doc["nodes"]) {
      if (!n.is_string()) throw SchemaViolation("node names must be strings");
      const auto name = n.get<std::string>();
      if (!empty.index_of(name)) throw SchemaViolation("unknown node '" + name + "'");
      listed.insert(name);
    }
    if (listed.size() != variables.size())
      throw SchemaViolation("node list does not cover every variable");
  }
  AdjacencyMatrix a = AdjacencyMatrix::Zero(empty.size(), empty.size());
  for (const auto& [s, t] : named_edges_from_json(doc)) {
    auto si = empty.index_of(s);
    auto ti = empty.index_of(t);
    if (!si || !ti) throw SchemaViolation("edge references unknown node '" + (si ? t : s) + "'");
    if (*si == *ti) throw SchemaViolation("self-loop on '" + s + "'");
    a(*si, *ti) = 1;
  }
  return empty.with_adjacency(std::move(a));
}

nlohmann::json variable_to_json(const Variable& v) {
  return {{"name", v.name},
          {"kind", std::string(to_string(v.kind))},
          {"unit", v.unit},
          {"bounds", {v.bounds.low, v.bounds.high}}};
}

Variable variable_from_json(const nlohmann::json& doc) {
  Variable v;
  v.name = doc.at("name").get<std::string>();
  v.kind = variable_kind_from_string(doc.at("kind").get<std::string>());
  v.unit = doc.value("unit", std::string{});
  const auto& b = doc.at("bounds");
  v.bounds = {b.at(0).get<double>(), b.at(1).get<double>()};
  return v;
}

}  // namespace grid
