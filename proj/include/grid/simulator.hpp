#pragma once

#include "grid/dataset.hpp"
#include "grid/scenario.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace grid {

/// splitmix64 finaliser applied to (seed, stream); used for every derived seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);
/// Seed of zone `z`. Zone 0 keeps the run seed, so a one-zone run with seed
/// zone_seed(s, z) reproduces zone z of an uncoupled multi-zone run.
std::uint64_t zone_seed(std::uint64_t seed, int zone);

namespace detail {
struct CompiledScenario;
}

/// Everything that evolves inside one zone. The process stream drives the
/// exogenous processes, structural noise and latents; the sensor stream only
/// feeds measurement noise.
struct ZoneState {
  Eigen::VectorXd ar;          // AR(1) deviations, zero for non-process variables
  Eigen::VectorXd innovation;  // structural noise draw of the current step
  Eigen::VectorXd values;      // noise-free values of the current step
  Eigen::VectorXd previous;    // values of the previous step, empty at step 0
  Eigen::VectorXd latents;     // current latent values
  std::mt19937_64 process_rng;
  std::mt19937_64 sensor_rng;
};

struct SimState {
  std::uint64_t rng_seed = 0;
  std::vector<ZoneState> zones;
  long step_index = 0;
  /// Active do-interventions (variable index -> value), applied in `active_zone`.
  std::map<int, double> interventions;
  int active_zone = 0;
  std::shared_ptr<const detail::CompiledScenario> model;

  /// Latent values of the hidden variables in a zone.
  const Eigen::VectorXd& hidden_states(int zone = 0) const { return zones.at(static_cast<std::size_t>(zone)).latents; }
};

/// Fresh state with stationary initial conditions, evaluated at step 0.
SimState initial_state(const ScenarioSpec& spec, std::uint64_t seed);

/// Moves every zone forward by one step and re-evaluates the equations.
void advance(SimState& state);

/// Noisy reading of one zone, clamped to bounds. Intervened variables read
/// their set point plus sensor noise.
Eigen::VectorXd measure(SimState& state, int zone);

std::vector<Sample> generate_observational(const ScenarioSpec& spec, int n_samples, std::uint64_t seed);

/// Holds `var` at `value` in the active zone and re-evaluates the current step.
SimState apply_do(SimState state, const ScenarioSpec& spec, const std::string& var, double value);
/// Lifts every intervention and re-evaluates the current step.
SimState release_do(SimState state);

struct TrialSamples {
  std::vector<Sample> pre;
  std::vector<Sample> post;
  /// Latent values (active zone) per step of each phase.
  std::vector<Eigen::VectorXd> pre_latents;
  std::vector<Eigen::VectorXd> post_latents;
};

/// Two-phase protocol from the current state: t_baseline observational steps,
/// then the same exogenous realisation replayed under do(var = value) for
/// t_hold steps. Sensor noise is not replayed. On return `state` sits at the
/// end of the do-phase with the intervention released.
TrialSamples run_intervention_trial(const ScenarioSpec& spec, SimState& state, const std::string& var, double value,
                                    int t_baseline, int t_hold);

/// n + α·m + β·r + γ·h + δ·z with r, h, z the noise / hidden / multi-zone indicators.
double complexity_score(const ScenarioSpec& spec);

}  // namespace grid
