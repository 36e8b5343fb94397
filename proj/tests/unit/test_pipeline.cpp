#include "grid/benchmark.hpp"
#include "grid/errors.hpp"
#include "grid/pipeline.hpp"
#include "grid/simulator.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace grid;

namespace {

class DownProvider final : public PriorProvider {
 public:
  ProviderKind kind() const override { return ProviderKind::Remote; }
  std::string complete(const PromptSpec&, const std::vector<Variable>&) const override {
    throw TransportError("offline");
  }
};

class ConstantBackend final : public ExecutionBackend {
 public:
  explicit ConstantBackend(std::vector<Variable> v) : vars_(std::move(v)) {}
  const std::vector<Variable>& variables() const override { return vars_; }
  void reset(std::uint64_t) override {}
  Eigen::VectorXd observe() override { return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vars_.size())); }
  void intervene(int, double) override {}
  void step() override {}

 private:
  std::vector<Variable> vars_;
};

LoopConfig quick(LoopConfig cfg) {
  cfg.prompt_settings.base_backoff = std::chrono::milliseconds(0);
  return cfg;
}

RunReport run_base(std::uint64_t seed, LoopConfig base = {}) {
  const auto spec = base_scenario();
  auto r = prepare_scenario_run(spec, seed);
  const MockProvider mock;
  return run(r.data, &r.backend, scenario_loop_config(spec, seed, base), &mock);
}

ScoredEdge scored(Edge e, int support, EdgeStatus st = EdgeStatus::Untested) {
  ScoredEdge s;
  s.edge = e;
  for (int k = 0; k < support; ++k) s.supporters[static_cast<std::size_t>(k)] = true;
  s.status = st;
  s.confidence = st == EdgeStatus::Validated ? 1.0 : support / 3.0;
  return s;
}

std::vector<Variable> mediators(int n) {
  std::vector<Variable> v;
  for (int i = 0; i < n; ++i) v.push_back({"V" + std::to_string(i), VariableKind::Mediator, "", {0, 1}});
  return v;
}

}  // namespace

TEST(Pipeline, BaseReachesGroundTruth) {
  const auto r = run_base(7);
  EXPECT_EQ(r.termination, Termination::ZeroShd);
  EXPECT_LT(r.trace.size(), 60u);
  EXPECT_EQ(r.final_graph, base_scenario().ground_truth);
  ASSERT_TRUE(r.metrics);
  EXPECT_DOUBLE_EQ(r.metrics->f1, 1.0);
  EXPECT_DOUBLE_EQ(r.metrics->cost, 0.0);
}

TEST(Pipeline, TraceInvariants) {
  LoopConfig cfg;
  cfg.shd_termination = false;
  const auto r = run_base(3, cfg);
  const auto spec = base_scenario();
  int rows = 0;
  for (const auto& it : r.trace) {
    EXPECT_TRUE(is_acyclic(it.current_graph));
    EXPECT_EQ(apply_constraints(it.current_graph, spec.constraints), it.current_graph);
    EXPECT_GE(it.dataset_rows, rows);
    rows = it.dataset_rows;
    for (const auto& s : it.union_graph.scored_edges) {
      EXPECT_GE(s.confidence, 0.0);
      EXPECT_LE(s.confidence, 1.0);
    }
  }
  // once validated, an edge stays in every later union at confidence 1
  std::set<Edge> validated;
  for (const auto& it : r.trace) {
    for (const auto& e : validated) {
      const auto* s = it.union_graph.find(e);
      ASSERT_NE(s, nullptr);
      EXPECT_DOUBLE_EQ(s->confidence, 1.0);
    }
    if (it.record_index && r.records[*it.record_index].verdict == EdgeStatus::Validated)
      validated.insert(*it.tested_edge);
  }
  EXPECT_TRUE(r.termination == Termination::AllValidated || r.termination == Termination::MaxIterations);
}

TEST(Pipeline, SingleIterationBudget) {
  LoopConfig cfg;
  cfg.t_max = 1;
  cfg.shd_termination = false;
  const auto r = run_base(2, cfg);
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_TRUE(r.trace[0].tested_edge.has_value());
  EXPECT_EQ(r.termination, Termination::MaxIterations);
}

TEST(Pipeline, FullConsensusEndsImmediately) {
  const std::vector<Variable> vars{{"A", VariableKind::Input, "", {-10, 10}}, {"B", VariableKind::Output, "", {-50, 50}}};
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  std::vector<Sample> s;
  for (int k = 0; k < 500; ++k) {
    const double a = z(rng);
    s.push_back({Eigen::Vector2d(a, 3 * a + 0.3 * z(rng)), 1.0, {}});
  }
  const MockProvider mock;
  ConstantBackend unused(vars);
  const auto r = run(Dataset::from_samples(vars, s), &unused, LoopConfig{}, &mock);
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.termination, Termination::AllValidated);
  EXPECT_TRUE(r.records.empty());
  EXPECT_TRUE(r.final_graph.has_edge(0, 1));
  EXPECT_EQ(r.untested_edges, (std::vector<Edge>{{0, 1}}));
}

TEST(Pipeline, DeterministicForFixedSeed) {
  const auto a = run_base(11), b = run_base(11);
  EXPECT_EQ(a.final_graph, b.final_graph);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k)
    EXPECT_DOUBLE_EQ(a.records[k].representative_delta(), b.records[k].representative_delta());
}

TEST(Pipeline, RankingAblationStillConverges) {
  LoopConfig cfg;
  cfg.enable_ranking = false;
  const auto r = run_base(5, cfg);
  EXPECT_EQ(r.final_graph, base_scenario().ground_truth);
}

TEST(Pipeline, ObservationOnlyRunsOnce) {
  const auto spec = base_scenario();
  auto sr = prepare_scenario_run(spec, 4);
  const MockProvider mock;
  const auto cfg = method_config(scenario_loop_config(spec, 4), Method::GRID_O);
  const auto r = run(sr.data, nullptr, cfg, &mock);
  EXPECT_EQ(r.termination, Termination::ObservationOnly);
  EXPECT_EQ(r.trace.size(), 1u);
  EXPECT_TRUE(r.records.empty());
  for (const auto& e : r.final_graph.edges()) EXPECT_GE(r.trace[0].union_graph.find(e)->support_count(), 2);
  EXPECT_THROW(run(sr.data, nullptr, scenario_loop_config(spec, 4), &mock), InvalidArgument);
}

TEST(Pipeline, UnavailablePriorDegradesUnlessRequired) {
  const auto spec = base_scenario();
  auto sr = prepare_scenario_run(spec, 6);
  const DownProvider down;
  auto cfg = quick(scenario_loop_config(spec, 6));
  const auto r = run(sr.data, &sr.backend, cfg, &down);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_EQ(r.generators_used, (std::vector<Generator>{Generator::PC, Generator::NSEM}));
  cfg.require_llm = true;
  EXPECT_THROW(run(sr.data, &sr.backend, cfg, &down), PriorUnavailable);
  auto llm_only = quick(method_config(scenario_loop_config(spec, 6), Method::LLMOnly));
  EXPECT_THROW(run(sr.data, nullptr, llm_only, &down), PriorUnavailable);
}

TEST(FinalGraph, KeepsValidatedAndFullConsensus) {
  UnionGraph u{DirectedGraph(mediators(4)), {}};
  u.scored_edges = {scored({0, 1}, 1, EdgeStatus::Validated), scored({1, 2}, 3), scored({2, 3}, 2),
                    scored({0, 3}, 1)};
  const auto g = final_graph(u, {});
  EXPECT_EQ(g.edges(), (std::vector<Edge>{{0, 1}, {1, 2}}));
  const auto obs = final_graph(u, {}, true);
  EXPECT_EQ(obs.edges(), (std::vector<Edge>{{0, 1}, {1, 2}, {2, 3}}));
  EXPECT_EQ(final_graph(std::vector<IterationTrace>{}, {}).size(), 0);
}

TEST(FinalGraph, CycleDropsLowestConfidenceEdge) {
  UnionGraph u{DirectedGraph(mediators(3)), {}};
  u.scored_edges = {scored({0, 1}, 3, EdgeStatus::Validated), scored({1, 2}, 3), scored({2, 0}, 3)};
  u.scored_edges[1].confidence = 1.0;
  u.scored_edges[2].confidence = 1.0;
  u.scored_edges[0].confidence = 1.0;
  const auto g = final_graph(u, {});
  EXPECT_TRUE(is_acyclic(g));
  EXPECT_EQ(g.edge_count(), 2);
  // equal confidence: the larger (source, target) pair goes
  EXPECT_FALSE(g.has_edge(2, 0));
}

TEST(FinalGraph, MediatedEdgeIsPruned) {
  UnionGraph u{DirectedGraph(mediators(3)), {}};
  u.scored_edges = {scored({0, 1}, 2, EdgeStatus::Validated), scored({0, 2}, 2, EdgeStatus::Validated),
                    scored({1, 2}, 2, EdgeStatus::Validated)};
  Skeleton sk;
  sk.adjacency = AdjacencyMatrix::Zero(3, 3);
  sk.adjacency(0, 1) = sk.adjacency(1, 0) = sk.adjacency(1, 2) = sk.adjacency(2, 1) = 1;
  sk.sepsets[{0, 2}] = {1};
  EXPECT_EQ(mediated_edges(u, sk), (std::vector<Edge>{{0, 2}}));
  EXPECT_FALSE(final_graph(u, {}, false, &sk).has_edge(0, 2));
  // adjacent in the skeleton: kept
  sk.adjacency(0, 2) = sk.adjacency(2, 0) = 1;
  sk.sepsets.clear();
  EXPECT_TRUE(mediated_edges(u, sk).empty());
}

TEST(LoopConfigTest, Validation) {
  LoopConfig c;
  c.t_max = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.generators.clear();
  EXPECT_THROW(c.validate(), InvalidArgument);
  EXPECT_EQ(to_string(Termination::ZeroShd), "zero_shd");
}
