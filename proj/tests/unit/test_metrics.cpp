#include "grid/errors.hpp"
#include "grid/metrics.hpp"
#include "grid/scenario.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <fstream>

using namespace grid;

namespace {

InterventionRecord record(Edge e, double delta, double sat_loss, double energy) {
  InterventionRecord r;
  r.plan.edge = e;
  TrialResult t;
  t.delta = delta;
  r.trials = {t};
  r.satisfaction_loss = sat_loss;
  r.energy_increase = energy;
  return r;
}

DirectedGraph with_fp() {
  const auto s = base_scenario();
  return s.ground_truth.with_edge({0, 1});
}

}  // namespace

TEST(Cost, WorkedExample) {
  EXPECT_NEAR(edge_cost({record({0, 1}, 0.5, 0.2, 0.1)}, {}), 0.18, 1e-12);
  // two records average; the sub-gate record is filtered out
  const std::vector<InterventionRecord> recs{record({0, 1}, 0.5, 0.2, 0.1), record({0, 1}, -0.4, 0.3, 0.4),
                                             record({0, 1}, 0.01, 5.0, 5.0)};
  EXPECT_NEAR(edge_cost(recs, {}), 0.3, 1e-12);
  EXPECT_DOUBLE_EQ(edge_cost({record({0, 1}, 0.05, 1, 1)}, {}), 0.0);
  const auto costs = edge_costs(recs, {});
  EXPECT_NEAR(costs.at({0, 1}), 0.3, 1e-12);
  const auto s = base_scenario();
  EXPECT_NEAR(method_cost(with_fp(), s.ground_truth, costs), 0.3, 1e-12);
  EXPECT_DOUBLE_EQ(method_cost(with_fp(), s.ground_truth, {}), 0.0);
}

TEST(Cost, ZeroWithoutFalsePositives) {
  const auto s = base_scenario();
  const std::vector<InterventionRecord> recs{record({0, 3}, 2.0, 0.5, 0.5)};
  EXPECT_DOUBLE_EQ(method_cost(s.ground_truth, s.ground_truth, edge_costs(recs, {})), 0.0);
  EXPECT_DOUBLE_EQ(method_risk(s.ground_truth, s.ground_truth, recs, {}), 0.0);
  const auto e = evaluate_method("GRID", s.ground_truth, s.ground_truth, recs);
  EXPECT_DOUBLE_EQ(e.f1, 1.0);
  EXPECT_EQ(e.shd, 0);
  EXPECT_DOUBLE_EQ(e.cost, 0.0);
  EXPECT_DOUBLE_EQ(e.risk, 0.0);
}

TEST(Risk, MeanSatisfactionLossOverFalsePositives) {
  const auto s = base_scenario();
  const std::vector<InterventionRecord> recs{record({0, 1}, 0.5, 0.1, 0.0), record({0, 1}, 0.5, 0.3, 0.0),
                                             record({0, 1}, 0.0, 9.0, 0.0)};
  EXPECT_NEAR(method_risk(with_fp(), s.ground_truth, recs, {}), 0.2, 1e-12);
  const auto g2 = with_fp().with_edge({2, 1});
  EXPECT_NEAR(method_risk(g2, s.ground_truth, recs, {}), 0.1, 1e-12);
  const auto e = evaluate_method("X", g2, s.ground_truth, recs);
  EXPECT_EQ(e.n_false_positive_edges, 2);
  EXPECT_NEAR(e.precision, 0.75, 1e-12);
  EXPECT_EQ(e.shd, 2);
}

TEST(Welch, MatchesScipyFixtures) {
  std::ifstream in(std::string(GRID_TEST_DATA_DIR) + "/welch_fixtures.json");
  ASSERT_TRUE(in);
  const auto fixtures = nlohmann::json::parse(in);
  ASSERT_EQ(fixtures.size(), 50u);
  for (const auto& f : fixtures) {
    const auto r = welch_t_test(f["a"].get<std::vector<double>>(), f["b"].get<std::vector<double>>());
    EXPECT_NEAR(r.t, f["t"].get<double>(), 1e-6);
    EXPECT_NEAR(r.p_value, f["p"].get<double>(), 1e-6);
  }
}

TEST(Welch, DegenerateCases) {
  EXPECT_THROW(welch_t_test({1.0}, {1.0, 2.0}), InsufficientSamples);
  EXPECT_DOUBLE_EQ(welch_t_test({1, 1, 1}, {1, 1}).p_value, 1.0);
  EXPECT_DOUBLE_EQ(welch_t_test({1, 1, 1}, {2, 2}).p_value, 0.0);
}

TEST(Confidence, StepAtThreshold) {
  std::vector<double> pre, post, near;
  for (int k = 0; k < 20; ++k) {
    pre.push_back(k % 2);
    post.push_back(5 + k % 2);
    near.push_back(k % 2 + 0.05);
  }
  EXPECT_DOUBLE_EQ(effect_confidence(pre, post), 0.9);
  EXPECT_DOUBLE_EQ(effect_confidence(pre, near), 0.5);
}

TEST(Welch, PValueFallsAsShiftGrows) {
  std::vector<double> a;
  for (int k = 0; k < 15; ++k) a.push_back(std::sin(k * 1.3));
  double prev = 1.1;
  for (double shift : {0.0, 0.2, 0.5, 1.0, 2.0}) {
    std::vector<double> b;
    for (int k = 0; k < 15; ++k) b.push_back(std::cos(k * 0.7) + shift);
    const double p = welch_t_test(a, b).p_value;
    EXPECT_LE(p, prev);
    prev = p;
  }
}

TEST(MetricsCsv, HeaderAndRows) {
  const auto s = base_scenario();
  const auto e = evaluate_method("GRID", s.ground_truth, s.ground_truth, {});
  const auto csv = evaluations_to_csv({{"base", "1", e}, {"base", "median", e}});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "scenario,seed,method,precision,recall,f1,shd,cost,risk,n_false_positive_edges");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  CostConfig bad;
  bad.alpha = -1;
  EXPECT_THROW(bad.validate(), InvalidArgument);
}
