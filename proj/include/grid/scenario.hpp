#pragma once

#include "grid/graph.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace grid {

enum class ScenarioName { Base, Noisy, Hidden, LargeSim };

std::string_view to_string(ScenarioName name);
ScenarioName scenario_name_from_string(std::string_view text);

enum class TermShape { Linear, Absolute };

/// One additive contribution from a parent: coef·(x - center) or coef·|x - center|.
struct Term {
  std::string source;
  TermShape shape = TermShape::Linear;
  double coefficient = 0.0;
  double center = 0.0;

  double evaluate(double x) const;
};

enum class Link { Identity, Comfort };

/// Stationary AR(1) deviation around `mean` with stationary standard deviation `sd`.
struct ExogenousProcess {
  double mean = 0.0;
  double sd = 1.0;
  double persistence = 0.5;
};

/// Structural equation of one observed variable:
///   value = process + intercept + link(sum inner) + sum outer + noise_sd·ε
/// followed by latent effects and clamping to the variable bounds.
struct Equation {
  std::string target;
  std::optional<ExogenousProcess> process;
  double intercept = 0.0;
  Link link = Link::Identity;
  std::vector<Term> inner;
  std::vector<Term> outer;
  double noise_sd = 0.0;
};

enum class LatentKind { Beta, Markov, Sinusoid };

struct LatentEffect {
  std::string target;
  double coefficient = 0.0;
  bool multiplicative = false;
};

/// Unobserved driver. Beta latents are redrawn every `hold` steps and mapped
/// onto [low, high]; Markov latents are two-state {0, 1} chains; sinusoids
/// follow amplitude·sin(2π t / period + phase).
struct LatentSpec {
  std::string name;
  LatentKind kind = LatentKind::Beta;
  double alpha = 2.0;
  double beta = 2.0;
  double low = 0.0;
  double high = 1.0;
  int hold = 1;
  double p_on = 0.1;
  double p_off = 0.1;
  double amplitude = 1.0;
  double period = 100.0;
  double phase = 0.0;
  std::vector<LatentEffect> effects;
};

/// Zone-to-zone coupling on one variable: value_z += Σ_n K(z,n)·(prev_n − prev_z).
struct CouplingSpec {
  std::string variable;
  Eigen::MatrixXd matrix;

  bool active() const { return matrix.size() > 0 && matrix.cwiseAbs().maxCoeff() > 0.0; }
};

struct ComplexityWeights {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  double delta = 1.0;
  /// Number of variables counted as intervenable in the complexity score.
  int intervenable = 0;
};

/// Generative model definition for one simulated scenario.
struct ScenarioSpec {
  ScenarioName name = ScenarioName::Base;
  std::string environment = "smart room environment";
  std::vector<Variable> variables;
  DirectedGraph ground_truth;
  std::vector<Equation> equations;
  std::map<std::string, double> noise_sd;
  std::vector<LatentSpec> hidden;
  int zones = 1;
  CouplingSpec coupling;
  ComplexityWeights complexity;
  StructuralConstraints constraints;
  double comfort_slope = 2.0;
  std::string energy_variable = "EnergyConsumption";
  std::string satisfaction_variable = "OverallSatisfaction";
  int default_samples = 1000;

  int index_of(std::string_view variable) const;
  const Equation& equation(int variable) const;
  /// Graph implied by the equations' observed-variable terms.
  DirectedGraph implied_graph() const;
  /// Checks every invariant (ground truth acyclic, constraint-stable and equal
  /// to the implied graph; noise non-negative; zones >= 1; coupling shape).
  void validate() const;
};

/// Predicted-percentage-dissatisfied proxy in [0.05, 1): logistic in |pmv|.
double ppd_proxy(double pmv, double slope);

ScenarioSpec base_scenario(bool extended_ground_truth = false);
ScenarioSpec noisy_scenario();
ScenarioSpec hidden_scenario();
ScenarioSpec large_sim_scenario();
/// "base", "noisy", "hidden" or "largesim".
ScenarioSpec builtin_scenario(std::string_view name);
std::vector<std::string> builtin_scenario_names();

nlohmann::json scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const nlohmann::json& doc);

}  // namespace grid
