#pragma once

#include "grid/dataset.hpp"
#include "grid/graph.hpp"

#include <Eigen/Core>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace grid {

struct CITestResult {
  int i = 0;
  int j = 0;
  std::vector<int> conditioning_set;
  double partial_corr = 0.0;
  double z_stat = 0.0;
  double p_value = 1.0;
  bool independent = true;
};

struct PcConfig {
  double alpha = 0.05;
  /// Largest conditioning set; unset means n − 2 for n ≤ 6 and 3 above.
  std::optional<int> max_cond_set;
  bool stable = true;
  /// true: the first collider found wins a conflict. false: colliders are
  /// applied in order of decreasing separating-set p-value.
  bool collider_priority = true;

  void validate() const;
  int effective_max_cond_set(int n_variables) const;
};

/// Fisher-z tester over a fixed weighted correlation matrix.
class FisherZTest {
 public:
  FisherZTest(const Dataset& data, double alpha);
  FisherZTest(Eigen::MatrixXd correlation, double n_eff, double alpha);

  CITestResult operator()(int i, int j, std::span<const int> cond) const;

  const Eigen::MatrixXd& correlation() const { return corr_; }
  double effective_sample_size() const { return n_eff_; }

 private:
  Eigen::MatrixXd corr_;
  double n_eff_;
  double alpha_;
};

CITestResult fisher_z_test(const Dataset& data, int i, int j, std::span<const int> cond, double alpha = 0.05);

struct Skeleton {
  /// Symmetric 0/1 adjacency.
  AdjacencyMatrix adjacency;
  /// Separating set and its p-value for each removed pair, keyed by (min, max).
  std::map<std::pair<int, int>, std::vector<int>> sepsets;
  std::map<std::pair<int, int>, double> sepset_p;
  /// Every test performed, in execution order.
  std::vector<CITestResult> tests;

  bool adjacent(int i, int j) const { return adjacency(i, j) != 0; }
  const std::vector<int>* sepset(int i, int j) const;
};

Skeleton pc_skeleton(const Dataset& data, const PcConfig& config);

/// Collider orientation, Meek rules R1–R3, domain constraints and the index
/// tie-break, producing a DAG over `variables`.
DirectedGraph orient_edges(const std::vector<Variable>& variables, const Skeleton& skeleton,
                           const StructuralConstraints& constraints, const PcConfig& config = {});

struct PcResult {
  DirectedGraph graph;
  Skeleton skeleton;
};

PcResult run_pc(const Dataset& data, const PcConfig& config, const StructuralConstraints& constraints);

std::string ci_tests_to_csv(const std::vector<Variable>& variables, const std::vector<CITestResult>& tests);

}  // namespace grid
