#pragma once

#include "grid/backend.hpp"
#include "grid/consensus.hpp"
#include "grid/dataset.hpp"
#include "grid/llm_prior.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace grid {

/// Defaults shared by every plan of a run.
struct InterventionConfig {
  int n_trials = 3;
  int t_baseline = 20;
  int t_short = 20;
  int t_long = 60;
  double delta_gate = 0.05;
  double epsilon = 0.1;
  /// Minimum gap between the starts of two interventions, seconds.
  double min_spacing_s = 300.0;
  /// Settling time after an intervention ends, seconds.
  double stabilization_s = 600.0;
  int daily_cap = 1000;
  /// Validate on a majority of trials instead of any single one.
  bool majority_vote = false;
  double pseudo_sample_weight = 2.0;

  void validate() const;
};

struct InterventionPlan {
  Edge edge;
  std::string source;
  std::string target;
  double target_value = 0.0;
  /// "llm" when the value came from the provider, "fallback" otherwise.
  std::string origin = "fallback";
  InterventionConfig config;
};

struct TrialResult {
  double pre_mean = 0.0;
  double post_mean = 0.0;
  double baseline_sd = 0.0;
  double effect_size = 0.0;
  /// Signed (post_mean − pre_mean) / baseline_sd, 0 when baseline_sd = 0.
  double delta = 0.0;
  /// Window length actually used (t_short, or t_long after the gate fired).
  int window = 0;
  double start_s = 0.0;
};

struct InterventionRecord {
  InterventionPlan plan;
  std::vector<TrialResult> trials;
  EdgeStatus verdict = EdgeStatus::Refuted;
  double satisfaction_loss = 0.0;
  double energy_increase = 0.0;
  double cohens_d = 0.0;
  /// Target readings over all baseline and do windows.
  std::vector<double> pre_target;
  std::vector<double> post_target;
  /// Full readings of every do window, in order.
  std::vector<Sample> post_samples;

  /// Trial delta with the largest magnitude (0 without trials).
  double representative_delta() const;
};

/// Books intervention slots in simulated seconds.
class Scheduler {
 public:
  explicit Scheduler(double min_spacing_s = 300.0, double stabilization_s = 600.0, int daily_cap = 1000,
                     bool roll_over_days = true);

  /// Earliest admissible start at or after `now()`; moves to the next day when
  /// the cap is reached and rolling over is allowed, otherwise CapExceeded.
  double earliest_start() const;
  /// Reserves [start, start + duration). SpacingViolation / CapExceeded when
  /// the slot breaks a rule.
  void book(double start_s, double duration_s);

  double now() const { return now_; }
  int booked_on_day(long day) const;
  const std::vector<std::pair<double, double>>& bookings() const { return bookings_; }

 private:
  double spacing_;
  double stabilization_;
  int cap_;
  bool roll_over_;
  double now_ = 0.0;
  std::vector<std::pair<double, double>> bookings_;
};

/// x* from the provider when it is remote and answers, clamped to bounds;
/// otherwise the bound farther from the baseline mean (ties go high).
InterventionPlan design_intervention(const Edge& edge, const std::vector<Variable>& variables, double baseline_mean,
                                     const InterventionConfig& config, const PriorProvider* provider = nullptr,
                                     const PromptSpec* base_prompt = nullptr, const Sleeper& sleep = real_sleeper());

/// Role of selected variables when computing comfort and energy side effects.
struct OutcomeVariables {
  std::optional<int> satisfaction;
  std::optional<int> energy;

  static OutcomeVariables from_names(const std::vector<Variable>& variables, const std::string& satisfaction,
                                     const std::string& energy);
};

/// Runs the plan's trials on the backend. Each trial replays one episode twice:
/// a baseline window and a do window; when the short-window |Δ| exceeds the
/// gate both windows are re-run at t_long. `episode` is advanced per trial.
InterventionRecord execute(const InterventionPlan& plan, ExecutionBackend& backend, Scheduler& scheduler,
                           std::uint64_t& episode, const OutcomeVariables& outcomes = {});

/// One intervention on the plan's source, read against the plan's target and
/// every extra target. Records come back in that order; they share the
/// windows, side effects and post samples. Window lengths follow the primary
/// target.
std::vector<InterventionRecord> execute_multi(const InterventionPlan& plan, const std::vector<int>& extra_targets,
                                              ExecutionBackend& backend, Scheduler& scheduler, std::uint64_t& episode,
                                              const OutcomeVariables& outcomes = {});

/// Adjudication rule: any trial (or a majority) with |delta| > epsilon.
EdgeStatus adjudicate(const std::vector<TrialResult>& trials, double epsilon, bool majority_vote = false);

/// Post-window readings as weighted interventional samples.
std::vector<Sample> to_pseudo_samples(const InterventionRecord& record);

nlohmann::json record_to_json(const InterventionRecord& record);
/// One JSON object per line.
std::string records_to_jsonl(const std::vector<InterventionRecord>& records);

}  // namespace grid
