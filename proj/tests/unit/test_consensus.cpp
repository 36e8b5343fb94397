#include "grid/consensus.hpp"
#include "grid/errors.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace grid;

namespace {

DirectedGraph g(std::initializer_list<Edge> edges) { return DirectedGraph(oracle::make_vars(4), edges); }

}  // namespace

TEST(Consensus, ConfidenceIsSupportOverThree) {
  const auto u = merge(g({{0, 1}, {1, 2}, {2, 3}}), g({{1, 2}, {2, 3}}), g({{2, 3}}), {});
  ASSERT_EQ(u.scored_edges.size(), 3u);
  EXPECT_DOUBLE_EQ(u.find({0, 1})->confidence, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(u.find({1, 2})->confidence, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(u.find({2, 3})->confidence, 1.0);
  EXPECT_TRUE(u.find({0, 1})->supported_by(Generator::PC));
  EXPECT_FALSE(u.find({0, 1})->supported_by(Generator::LLM));
  EXPECT_EQ(u.graph(), g({{0, 1}, {1, 2}, {2, 3}}));
}

TEST(Consensus, QueueIsAscendingConfidenceThenIndex) {
  const auto u = merge(g({{2, 3}, {0, 1}, {0, 2}}), g({{0, 2}, {1, 3}}), g({{0, 2}, {1, 3}, {3, 0}}), {});
  const auto q = rank_for_testing(u);
  std::vector<Edge> order;
  for (const auto& s : q) order.push_back(s.edge);
  EXPECT_EQ(order, (std::vector<Edge>{{0, 1}, {2, 3}, {3, 0}, {1, 3}}));
}

TEST(Consensus, HistoryOverridesSupport) {
  EdgeHistory h{{{0, 1}, EdgeStatus::Refuted}, {{1, 2}, EdgeStatus::Validated}, {{3, 2}, EdgeStatus::Validated}};
  const auto u = merge(g({{0, 1}, {1, 2}}), g({}), g({}), h);
  EXPECT_EQ(u.find({0, 1}), nullptr);
  EXPECT_DOUBLE_EQ(u.find({1, 2})->confidence, 1.0);
  // validated edges are carried even when no generator proposes them again
  ASSERT_NE(u.find({3, 2}), nullptr);
  EXPECT_EQ(u.find({3, 2})->status, EdgeStatus::Validated);
  EXPECT_TRUE(rank_for_testing(u).empty());
}

TEST(Consensus, PropertyConfidenceInUnitInterval) {
  const auto graphs = oracle::all_digraphs(3);
  for (std::size_t a = 0; a < graphs.size(); a += 7)
    for (std::size_t b = 0; b < graphs.size(); b += 11) {
      const auto u = merge(oracle::to_graph(graphs[a], 3), oracle::to_graph(graphs[b], 3),
                           oracle::to_graph(graphs[(a + b) % graphs.size()], 3), {});
      for (const auto& s : u.scored_edges) {
        EXPECT_GT(s.confidence, 0.0);
        EXPECT_LE(s.confidence, 1.0);
        EXPECT_DOUBLE_EQ(s.confidence * 3.0, s.support_count());
      }
      for (const auto& s : rank_for_testing(u)) EXPECT_LT(s.support_count(), 3);
    }
}

TEST(Consensus, AblatedCandidatesAndErrors) {
  const auto u = merge(Candidates{{Generator::NSEM, g({{0, 1}})}}, {});
  EXPECT_DOUBLE_EQ(u.find({0, 1})->confidence, 1.0 / 3.0);
  EXPECT_THROW(merge(Candidates{}, {}), InvalidArgument);
  EXPECT_THROW(merge(g({}), DirectedGraph(oracle::make_vars(3)), g({}), {}), NodeMismatch);
  EXPECT_EQ(generator_from_string("SAM"), Generator::NSEM);
  EXPECT_EQ(generator_from_string("Llm"), Generator::LLM);
  EXPECT_THROW(generator_from_string("ges"), InvalidArgument);
}
