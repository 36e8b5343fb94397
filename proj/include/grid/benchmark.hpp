#pragma once

#include "grid/backend.hpp"
#include "grid/metrics.hpp"
#include "grid/pipeline.hpp"
#include "grid/scenario.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace grid {

/// The loop and its own single-generator and observation-only ablations.
enum class Method { GRID, GRID_O, PCOnly, NSEMOnly, LLMOnly };

inline constexpr std::array<Method, 5> kAllMethods{Method::GRID, Method::GRID_O, Method::PCOnly, Method::NSEMOnly,
                                                   Method::LLMOnly};

std::string_view to_string(Method m);
Method method_from_string(std::string_view text);

/// Loop settings derived from a scenario: constraints, environment, outcome
/// variables, ground truth.
LoopConfig scenario_loop_config(const ScenarioSpec& spec, std::uint64_t seed, LoopConfig base = {});
/// `cfg` restricted to what `m` is allowed to use.
LoopConfig method_config(LoopConfig cfg, Method m);

/// Observational data and an independent simulator for one seed of a scenario.
struct ScenarioRun {
  Dataset data;
  SimulatorBackend backend;
};
ScenarioRun prepare_scenario_run(const ScenarioSpec& spec, std::uint64_t seed, int n_samples = 0);

/// Intervenes once on every false-positive edge of `g_hat` that `records`
/// does not already cover, so cost and risk exist for methods that never
/// intervene themselves.
std::vector<InterventionRecord> probe_false_positives(const ScenarioSpec& spec, std::uint64_t seed,
                                                      const DirectedGraph& g_hat, const Dataset& data,
                                                      const std::vector<InterventionRecord>& records,
                                                      const InterventionConfig& config);

struct CellResult {
  std::string scenario;
  std::uint64_t seed = 0;
  Method method = Method::GRID;
  std::optional<RunReport> report;
  MethodEvaluation evaluation;
  double seconds = 0.0;
  /// Empty on success.
  std::string error;
};

/// One scenario × seed × method run, evaluated against the ground truth.
CellResult run_cell(const ScenarioSpec& spec, std::uint64_t seed, Method method, const PriorProvider* provider,
                    const LoopConfig& base = {}, int n_samples = 0);

/// Per-cell rows followed by one median row per scenario × method (seed
/// column "median").
std::string benchmark_csv(const std::vector<CellResult>& cells);

double median(std::vector<double> v);

}  // namespace grid
