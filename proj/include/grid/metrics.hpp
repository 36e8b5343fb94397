#pragma once

#include "grid/graph.hpp"
#include "grid/intervene.hpp"

#include <map>
#include <string>
#include <vector>

namespace grid {

struct CostConfig {
  double alpha = 0.6;
  double beta = 0.6;
  double quality_delta_min = 0.05;
  double high_conf_p = 0.001;
  double high_conf_value = 0.9;
  double low_conf_value = 0.5;

  void validate() const;
};

/// True when the record's representative |Δ| clears the quality gate.
bool passes_quality(const InterventionRecord& record, const CostConfig& cfg);

/// Mean of α·s_i + β·ε_i over quality-filtered records; 0 when none remain.
double edge_cost(const std::vector<InterventionRecord>& records, const CostConfig& cfg);

/// edge_cost for every edge that has records.
std::map<Edge, double> edge_costs(const std::vector<InterventionRecord>& records, const CostConfig& cfg);

/// Mean edge cost over the false-positive edges of g_hat (missing costs count 0).
double method_cost(const DirectedGraph& g_hat, const DirectedGraph& g_true, const std::map<Edge, double>& costs);

/// Mean over false-positive edges of the quality-filtered mean satisfaction loss.
double method_risk(const DirectedGraph& g_hat, const DirectedGraph& g_true,
                   const std::vector<InterventionRecord>& records, const CostConfig& cfg);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

/// Two-sided Welch two-sample t-test. Two constant phases give p = 1 when
/// their means agree and p = 0 otherwise.
WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

/// high_conf_value when p < high_conf_p, low_conf_value otherwise.
double effect_confidence(const std::vector<double>& pre, const std::vector<double>& post, const CostConfig& cfg = {});

struct MethodEvaluation {
  std::string method;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int shd = 0;
  double cost = 0.0;
  double risk = 0.0;
  int n_false_positive_edges = 0;
  EdgeConfusion confusion;
};

MethodEvaluation evaluate_method(const std::string& method, const DirectedGraph& g_hat, const DirectedGraph& g_true,
                                 const std::vector<InterventionRecord>& records, const CostConfig& cfg = {});

struct EvaluationRow {
  std::string scenario;
  std::string seed;
  MethodEvaluation eval;
};

/// scenario,seed,method,precision,recall,f1,shd,cost,risk,n_false_positive_edges
std::string evaluations_to_csv(const std::vector<EvaluationRow>& rows);

}  // namespace grid
