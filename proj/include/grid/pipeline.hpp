#pragma once

#include "grid/backend.hpp"
#include "grid/consensus.hpp"
#include "grid/dataset.hpp"
#include "grid/intervene.hpp"
#include "grid/llm_prior.hpp"
#include "grid/metrics.hpp"
#include "grid/nsem.hpp"
#include "grid/pc.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace grid {

struct LoopConfig {
  int t_max = 60;
  std::vector<Generator> generators{kAllGenerators.begin(), kAllGenerators.end()};
  bool enable_ranking = true;
  bool enable_llm_interventions = true;
  /// Off: observation-only mode. Generators and consensus run once, no
  /// interventions; edges backed by at least two generators are kept.
  bool enable_validation = true;
  bool enable_dataset_update = true;
  std::optional<DirectedGraph> ground_truth;
  /// Stop as soon as the current graph matches ground_truth.
  bool shd_termination = true;
  /// Fail instead of degrading when the LLM prior cannot be obtained.
  bool require_llm = false;
  /// Drop validated edges whose effect the PC skeleton explains through a
  /// validated mediator (see prune_mediated).
  bool prune_mediated = true;
  /// Read every queued edge that shares the tested edge's source off the same
  /// intervention.
  bool shared_interventions = true;
  /// Refute queued edges a→b without testing when validated edges already
  /// lead from b to a.
  bool implied_refutation = true;
  std::uint64_t seed = 0;

  StructuralConstraints constraints;
  std::string environment = "smart room environment";
  std::string satisfaction_variable;
  std::string energy_variable;

  PcConfig pc;
  NsemConfig nsem;
  InterventionConfig intervention;
  PromptSpec prompt_settings;
  CostConfig cost;

  void validate() const;
  bool uses(Generator g) const;
};

enum class Termination { AllValidated, MaxIterations, ZeroShd, ObservationOnly };

std::string_view to_string(Termination t);

struct IterationTrace {
  int iteration = 0;
  Candidates candidates;
  UnionGraph union_graph;
  std::optional<Edge> tested_edge;
  /// Index into RunReport::records of the intervention made this iteration.
  std::optional<std::size_t> record_index;
  /// Further edges adjudicated from the same intervention (record indices).
  std::vector<std::size_t> shared_record_indices;
  /// Edges refuted without testing because they would close a validated cycle.
  std::vector<Edge> implied_refuted;
  DirectedGraph current_graph;
  /// Validated edges left out of current_graph as mediated.
  std::vector<Edge> mediated;
  std::optional<int> shd_vs_truth;
  int dataset_rows = 0;
};

struct RunReport {
  DirectedGraph final_graph;
  /// Final edges kept on full consensus without ever being intervened on.
  std::vector<Edge> untested_edges;
  std::vector<IterationTrace> trace;
  std::vector<InterventionRecord> records;
  Termination termination = Termination::MaxIterations;
  std::optional<MethodEvaluation> metrics;
  std::vector<std::string> warnings;
  std::vector<Generator> generators_used;
};

/// Validated edges X→Y that look indirect: another directed path of validated
/// or full-consensus edges runs from X to Y, and the skeleton separates X and Y by a set containing a
/// node of such a path.
std::vector<Edge> mediated_edges(const UnionGraph& u, const Skeleton& skeleton);

/// Validated edges plus untested full-consensus edges (or, in observation-only
/// mode, edges with support >= 2), minus mediated edges when a skeleton is
/// given, constraints applied, cycles broken by removing the lowest-confidence
/// edge of each cycle.
DirectedGraph final_graph(const UnionGraph& u, const StructuralConstraints& constraints,
                          bool observation_only = false, const Skeleton* skeleton = nullptr);
/// Same, from the last iteration of a trace; empty trace gives an empty graph.
DirectedGraph final_graph(const std::vector<IterationTrace>& trace, const StructuralConstraints& constraints,
                          bool observation_only = false);

/// The iterative loop. `backend` may be null only when validation is off.
/// `provider` may be null when the LLM generator is not used.
RunReport run(const Dataset& data_obs, ExecutionBackend* backend, const LoopConfig& cfg,
              const PriorProvider* provider);

}  // namespace grid
