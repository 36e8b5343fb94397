#include "grid/errors.hpp"
#include "grid/graph.hpp"
#include "grid/graph_json.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace grid;

namespace {
std::vector<Variable> room() {
  return {{"T", VariableKind::Input, "degC", {18, 30}},
          {"H", VariableKind::Input, "%", {30, 70}},
          {"E", VariableKind::Output, "kWh", {0, 100}}};
}
}  // namespace

TEST(Graph, EdgesFollowAdjacency) {
  DirectedGraph g(room(), std::vector<Edge>{{0, 2}, {1, 2}});
  EXPECT_EQ(g.edge_count(), 2);
  EXPECT_TRUE(g.has_edge(0, 2));
  EXPECT_FALSE(g.has_edge(2, 0));
  EXPECT_EQ(g.parents(2), (std::vector<int>{0, 1}));
  EXPECT_EQ(g.children(0), (std::vector<int>{2}));
  EXPECT_EQ(g.named_edges().front(), (NamedEdge{"T", "E"}));
}

TEST(Graph, RejectsSelfLoopsAndBadNodes) {
  EXPECT_THROW(DirectedGraph(room(), std::vector<Edge>{{1, 1}}), InvalidArgument);
  auto dup = room();
  dup[1].name = "T";
  EXPECT_THROW(DirectedGraph{dup}, InvalidArgument);
  EXPECT_THROW(DirectedGraph(room(), std::vector<Edge>{{0, 5}}), InvalidArgument);
  EXPECT_THROW(DirectedGraph::from_named_edges(room(), {{"T", "Nope"}}), NodeMismatch);
}

TEST(Graph, TransformationsLeaveOriginalUntouched) {
  const DirectedGraph g(room());
  const auto g2 = g.with_edge({0, 2});
  EXPECT_EQ(g.edge_count(), 0);
  EXPECT_EQ(g2.edge_count(), 1);
  EXPECT_EQ(g2.without_edge({0, 2}), g);
}

TEST(Graph, AcyclicityMatchesPermutationOracleUpToFourNodes) {
  for (int n = 2; n <= 4; ++n)
    for (const auto& s : oracle::all_digraphs(n)) {
      const auto g = oracle::to_graph(s, n);
      const bool expected = oracle::acyclic_by_permutation(s, n);
      ASSERT_EQ(is_acyclic(g), expected) << "n=" << n;
      const auto cycle = find_cycle(g.adjacency());
      ASSERT_EQ(cycle.empty(), expected);
      if (!cycle.empty()) {
        for (std::size_t k = 0; k < cycle.size(); ++k) {
          ASSERT_TRUE(g.has_edge(cycle[k]));
          ASSERT_EQ(cycle[k].target, cycle[(k + 1) % cycle.size()].source);
        }
      }
      const auto order = topological_order(g.adjacency());
      ASSERT_EQ(order.has_value(), expected);
      if (order) {
        std::vector<int> pos(n);
        for (int k = 0; k < n; ++k) pos[(*order)[k]] = k;
        for (auto [a, b] : s) ASSERT_LT(pos[a], pos[b]);
      }
    }
}

TEST(Graph, ShdAndConfusionMatchBruteForceOnThreeNodes) {
  const auto all = oracle::all_digraphs(3);
  for (const auto& t : all)
    for (const auto& e : all) {
      const auto gt = oracle::to_graph(t, 3), ge = oracle::to_graph(e, 3);
      ASSERT_EQ(shd(gt, ge), oracle::shd(t, e));
      const auto c = edge_confusion(gt, ge);
      const auto o = oracle::confusion(t, e, 3);
      ASSERT_EQ(c.tp, o.tp);
      ASSERT_EQ(c.fp, o.fp);
      ASSERT_EQ(c.fn, o.fn);
      ASSERT_EQ(c.tn, o.tn);
      const double p = o.tp + o.fp ? double(o.tp) / (o.tp + o.fp) : 0.0;
      const double r = o.tp + o.fn ? double(o.tp) / (o.tp + o.fn) : 0.0;
      ASSERT_DOUBLE_EQ(c.f1(), p + r > 0 ? 2 * p * r / (p + r) : 0.0);
      ASSERT_EQ(false_positive_edges(gt, ge).size(), static_cast<std::size_t>(o.fp));
    }
}

TEST(Graph, ShdCountsReversalTwice) {
  DirectedGraph a(room(), std::vector<Edge>{{0, 1}});
  DirectedGraph b(room(), std::vector<Edge>{{1, 0}});
  EXPECT_EQ(shd(a, b), 2);
  EXPECT_EQ(shd(a, a), 0);
}

TEST(Graph, NodeMismatchIsReported) {
  DirectedGraph a(room());
  DirectedGraph b(oracle::make_vars(3));
  EXPECT_THROW(shd(a, b), NodeMismatch);
  EXPECT_THROW(edge_confusion(a, b), NodeMismatch);
}

TEST(Constraints, OutputSourcesAndForbiddenEdgesAreRemoved) {
  StructuralConstraints c;
  c.forbidden_edges = {{"T", "H"}};
  DirectedGraph g(room(), std::vector<Edge>{{2, 0}, {0, 1}, {1, 2}});
  const auto out = apply_constraints(g, c);
  EXPECT_EQ(out.edges(), (std::vector<Edge>{{1, 2}}));
  EXPECT_FALSE(c.admits(g, {2, 1}));
  EXPECT_TRUE(c.admits(g, {1, 2}));
}

TEST(Constraints, RequiredOrientationFlipsReverseEdge) {
  StructuralConstraints c;
  c.required_orientations = {{"T", "H"}};
  DirectedGraph g(room(), std::vector<Edge>{{1, 0}});
  EXPECT_EQ(apply_constraints(g, c).edges(), (std::vector<Edge>{{0, 1}}));
  c.forbidden_edges = {{"T", "H"}};
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(GraphJson, RoundTripAndValidation) {
  DirectedGraph g(room(), std::vector<Edge>{{0, 2}, {1, 2}});
  const auto doc = graph_to_json(g);
  EXPECT_EQ(graph_from_json(doc, room()), g);
  EXPECT_THROW(graph_from_json(nlohmann::json::parse(R"({"edges": [["T", "X"]]})"), room()), SchemaViolation);
  EXPECT_THROW(graph_from_json(nlohmann::json::parse(R"({"edges": [["T", "T"]]})"), room()), SchemaViolation);
  EXPECT_THROW(graph_from_json(nlohmann::json::parse(R"({"nodes": ["T"], "edges": []})"), room()), SchemaViolation);
}
