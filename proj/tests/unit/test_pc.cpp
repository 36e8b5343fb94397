#include "grid/errors.hpp"
#include "grid/pc.hpp"
#include "grid/simulator.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace grid;

namespace {

Dataset from_matrix(const Eigen::MatrixXd& x) {
  Dataset d(oracle::make_vars(static_cast<int>(x.cols())));
  d.values = x;
  d.weights = Eigen::VectorXd::Ones(x.rows());
  d.regimes.assign(static_cast<std::size_t>(x.rows()), Regime::observational());
  return d;
}

StructuralConstraints none() {
  StructuralConstraints c;
  c.forbid_output_sources = false;
  return c;
}

}  // namespace

TEST(FisherZ, MatchesRegressionOracle) {
  std::mt19937_64 rng(17);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 4);
  w(0, 1) = 0.7;
  w(1, 2) = -0.5;
  w(0, 3) = 0.3;
  w(2, 3) = 0.6;
  const Eigen::MatrixXd x = oracle::sample_linear_sem(w, 500, rng);
  const Dataset d = from_matrix(x);
  const std::vector<std::pair<std::pair<int, int>, std::vector<int>>> cases{
      {{0, 2}, {}}, {{0, 2}, {1}}, {{1, 3}, {0, 2}}, {{0, 3}, {1, 2}}};
  for (const auto& [ij, cond] : cases) {
    const auto r = fisher_z_test(d, ij.first, ij.second, cond, 0.05);
    const double rho = oracle::partial_corr_by_regression(x, ij.first, ij.second, cond);
    EXPECT_NEAR(r.partial_corr, rho, 1e-9);
    const double z = 0.5 * std::log((1 + rho) / (1 - rho)) * std::sqrt(500.0 - cond.size() - 3.0);
    EXPECT_NEAR(r.z_stat, std::abs(z), 1e-6);
    EXPECT_NEAR(r.p_value, std::erfc(std::abs(z) / std::sqrt(2.0)), 1e-9);
    EXPECT_EQ(r.independent, r.p_value > 0.05);
  }
}

TEST(FisherZ, RejectsTinySamplesAndCollinearity) {
  Eigen::MatrixXd x(4, 3);
  x << 1, 2, 0, 2, 1, 1, 3, 5, 0, 4, 3, 1;
  const std::vector<int> cond{2};
  EXPECT_THROW(fisher_z_test(from_matrix(x), 0, 1, cond), InvalidArgument);
  Eigen::MatrixXd y(50, 3);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  for (int r = 0; r < 50; ++r) {
    y(r, 0) = z(rng);
    y(r, 1) = z(rng);
    y(r, 2) = 2 * y(r, 0);
  }
  EXPECT_THROW(fisher_z_test(from_matrix(y), 0, 1, cond), SingularSubmatrix);
}

TEST(Pc, ChainSkeletonAndSepset) {
  std::mt19937_64 rng(2);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 3);
  w(0, 1) = 0.8;
  w(1, 2) = 0.8;
  const auto sk = pc_skeleton(from_matrix(oracle::sample_linear_sem(w, 3000, rng)), {});
  EXPECT_TRUE(sk.adjacent(0, 1));
  EXPECT_TRUE(sk.adjacent(1, 2));
  EXPECT_FALSE(sk.adjacent(0, 2));
  ASSERT_NE(sk.sepset(2, 0), nullptr);
  EXPECT_EQ(*sk.sepset(0, 2), std::vector<int>{1});
  EXPECT_FALSE(sk.tests.empty());
}

TEST(Pc, ColliderIsOriented) {
  std::mt19937_64 rng(3);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 3);
  w(0, 2) = 0.8;
  w(1, 2) = 0.8;
  const auto r = run_pc(from_matrix(oracle::sample_linear_sem(w, 3000, rng)), {}, none());
  EXPECT_TRUE(r.graph.has_edge(0, 2));
  EXPECT_TRUE(r.graph.has_edge(1, 2));
  EXPECT_EQ(r.graph.edge_count(), 2);
  EXPECT_TRUE(r.skeleton.sepset(0, 1)->empty());
}

TEST(Pc, MeekPropagatesAwayFromCollider) {
  // 0 → 2 ← 1, 2 → 3: R1 orients 2 → 3
  std::mt19937_64 rng(4);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 4);
  w(0, 2) = 0.8;
  w(1, 2) = 0.8;
  w(2, 3) = 0.6;
  const auto r = run_pc(from_matrix(oracle::sample_linear_sem(w, 5000, rng)), {}, none());
  EXPECT_TRUE(r.graph.has_edge(2, 3));
  EXPECT_FALSE(r.graph.has_edge(3, 2));
  EXPECT_TRUE(is_acyclic(r.graph));
}

TEST(Pc, BaseScenarioRecoversMostEdges) {
  const auto s = base_scenario();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto d = Dataset::from_samples(s.variables, generate_observational(s, 1000, seed));
    const auto r = run_pc(d, {}, s.constraints);
    EXPECT_GE(edge_confusion(s.ground_truth, r.graph).tp, 4) << seed;
    EXPECT_TRUE(is_acyclic(r.graph));
    for (const auto& e : r.graph.edges()) EXPECT_NE(r.graph.node(e.source).kind, VariableKind::Output);
  }
}

TEST(Pc, StableSkeletonIgnoresColumnOrder) {
  std::mt19937_64 rng(8);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(5, 5);
  w(0, 1) = 0.6;
  w(0, 2) = 0.5;
  w(1, 3) = 0.7;
  w(2, 3) = 0.4;
  w(3, 4) = 0.8;
  const Dataset d = from_matrix(oracle::sample_linear_sem(w, 2000, rng));
  const std::vector<int> perm{3, 0, 4, 2, 1};
  const auto a = pc_skeleton(d, {});
  const auto b = pc_skeleton(d.permuted_columns(perm), {});
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) EXPECT_EQ(a.adjacent(perm[i], perm[j]), b.adjacent(i, j));
}

TEST(Pc, RequiredAndForbiddenEdgesAreHonoured) {
  std::mt19937_64 rng(6);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 3);
  w(0, 1) = 0.8;
  w(1, 2) = 0.8;
  auto c = none();
  c.required_orientations = {{"V2", "V1"}};
  c.forbidden_edges = {{"V0", "V1"}, {"V1", "V0"}};
  const auto r = run_pc(from_matrix(oracle::sample_linear_sem(w, 2000, rng)), {}, c);
  EXPECT_TRUE(r.graph.has_edge(2, 1));
  EXPECT_FALSE(r.graph.has_edge(0, 1));
  EXPECT_FALSE(r.graph.has_edge(1, 0));
}

TEST(Pc, ConfigValidation) {
  PcConfig c;
  c.alpha = 1.5;
  EXPECT_THROW(c.validate(), InvalidArgument);
  EXPECT_EQ(PcConfig{}.effective_max_cond_set(5), 3);
  EXPECT_EQ(PcConfig{}.effective_max_cond_set(13), 3);
  c = {};
  c.max_cond_set = 1;
  EXPECT_EQ(c.effective_max_cond_set(13), 1);
}

TEST(Pc, CiTestCsvHasOneRowPerTest) {
  const auto s = base_scenario();
  const auto d = Dataset::from_samples(s.variables, generate_observational(s, 300, 1));
  const auto sk = pc_skeleton(d, {});
  const auto csv = ci_tests_to_csv(s.variables, sk.tests);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), sk.tests.size() + 1);
}
