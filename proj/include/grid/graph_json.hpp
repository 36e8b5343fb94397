#pragma once

#include "grid/graph.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace grid {

/// `{"nodes": [...], "edges": [["source","target"], ...]}`
nlohmann::json graph_to_json(const DirectedGraph& g);

/// Binds a graph JSON document to `variables`. Node names in the document must
/// match the variable list exactly (same set, any order); edges may only name
/// listed variables. Throws SchemaViolation otherwise.
DirectedGraph graph_from_json(const nlohmann::json& doc, const std::vector<Variable>& variables);

/// Edge list of a graph JSON document without binding it to variables.
std::vector<NamedEdge> named_edges_from_json(const nlohmann::json& doc);

nlohmann::json variable_to_json(const Variable& v);
Variable variable_from_json(const nlohmann::json& doc);

}  // namespace grid
