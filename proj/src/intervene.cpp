#include "grid/intervene.hpp"

#include "grid/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace grid {

void InterventionConfig::validate() const {
  if (n_trials < 1) throw InvalidArgument("n_trials must be >= 1");
  if (t_baseline < 2 || t_short < 2 || t_long < 2) throw InvalidArgument("intervention windows need >= 2 steps");
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be > 0");
  if (delta_gate < 0.0) throw InvalidArgument("delta_gate must be >= 0");
  if (min_spacing_s < 0.0 || stabilization_s < 0.0) throw InvalidArgument("spacing and stabilization must be >= 0");
  if (daily_cap < 1) throw InvalidArgument("daily_cap must be >= 1");
  if (!(pseudo_sample_weight > 0.0)) throw InvalidArgument("pseudo-sample weight must be > 0");
}

double InterventionRecord::representative_delta() const {
  double best = 0.0;
  for (const auto& t : trials)
    if (std::abs(t.delta) > std::abs(best)) best = t.delta;
  return best;
}

// ---------------------------------------------------------------------------

namespace {
constexpr double kDay = 86400.0;
long day_of(double t) { return static_cast<long>(std::floor(t / kDay)); }
}  // namespace

Scheduler::Scheduler(double min_spacing_s, double stabilization_s, int daily_cap, bool roll_over_days)
    : spacing_(min_spacing_s), stabilization_(stabilization_s), cap_(daily_cap), roll_over_(roll_over_days) {
  if (spacing_ < 0 || stabilization_ < 0 || cap_ < 1) throw InvalidArgument("invalid scheduler settings");
}

int Scheduler::booked_on_day(long day) const {
  return static_cast<int>(std::count_if(bookings_.begin(), bookings_.end(),
                                        [day](const auto& b) { return day_of(b.first) == day; }));
}

double Scheduler::earliest_start() const {
  double t = now_;
  if (!bookings_.empty()) {
    const auto& [start, end] = bookings_.back();
    t = std::max({t, start + spacing_, end + stabilization_});
  }
  while (booked_on_day(day_of(t)) >= cap_) {
    if (!roll_over_) throw CapExceeded("daily intervention cap of " + std::to_string(cap_) + " reached");
    t = static_cast<double>(day_of(t) + 1) * kDay;
  }
  return t;
}

void Scheduler::book(double start_s, double duration_s) {
  if (duration_s < 0) throw InvalidArgument("negative intervention duration");
  if (!bookings_.empty()) {
    const auto& [start, end] = bookings_.back();
    if (start_s < start + spacing_) throw SpacingViolation("intervention starts too soon after the previous one");
    if (start_s < end + stabilization_) throw SpacingViolation("intervention starts before the system stabilised");
  }
  if (booked_on_day(day_of(start_s)) >= cap_)
    throw CapExceeded("daily intervention cap of " + std::to_string(cap_) + " reached");
  bookings_.emplace_back(start_s, start_s + duration_s);
  now_ = std::max(now_, start_s + duration_s);
}

// ---------------------------------------------------------------------------

InterventionPlan design_intervention(const Edge& edge, const std::vector<Variable>& variables, double baseline_mean,
                                     const InterventionConfig& config, const PriorProvider* provider,
                                     const PromptSpec* base_prompt, const Sleeper& sleep) {
  config.validate();
  const Variable& src = variables.at(static_cast<std::size_t>(edge.source));
  const Variable& dst = variables.at(static_cast<std::size_t>(edge.target));
  if (!src.intervenable()) throw NotIntervenable("'" + src.name + "' is an output and cannot be intervened on");
  InterventionPlan plan;
  plan.edge = edge;
  plan.source = src.name;
  plan.target = dst.name;
  plan.config = config;
  if (provider && provider->kind() == ProviderKind::Remote) {
    const PromptSpec base = base_prompt ? *base_prompt : build_prompt(variables, {});
    if (auto v = query_intervention_value(*provider, build_intervention_prompt(base, src, dst, baseline_mean),
                                          variables, sleep)) {
      plan.target_value = src.bounds.clamp(*v);
      plan.origin = "llm";
      return plan;
    }
  }
  const double up = std::abs(src.bounds.high - baseline_mean);
  const double down = std::abs(src.bounds.low - baseline_mean);
  plan.target_value = up >= down ? src.bounds.high : src.bounds.low;
  return plan;
}

OutcomeVariables OutcomeVariables::from_names(const std::vector<Variable>& variables, const std::string& satisfaction,
                                              const std::string& energy) {
  OutcomeVariables out;
  for (int i = 0; i < static_cast<int>(variables.size()); ++i) {
    if (variables[static_cast<std::size_t>(i)].name == satisfaction) out.satisfaction = i;
    if (variables[static_cast<std::size_t>(i)].name == energy) out.energy = i;
  }
  return out;
}

namespace {

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

struct Window {
  std::vector<Eigen::VectorXd> pre;
  std::vector<Eigen::VectorXd> post;
};

Window run_window(ExecutionBackend& backend, std::uint64_t episode, int source, double value, int steps_pre,
                  int steps_post) {
  Window w;
  backend.reset(episode);
  for (int t = 0; t < steps_pre; ++t) {
    backend.step();
    w.pre.push_back(backend.observe());
  }
  backend.reset(episode);
  backend.intervene(source, value);
  for (int t = 0; t < steps_post; ++t) {
    backend.step();
    w.post.push_back(backend.observe());
  }
  backend.reset(episode);
  return w;
}

std::vector<double> column(const std::vector<Eigen::VectorXd>& rows, int j) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r(j));
  return out;
}

TrialResult summarise(const Window& w, int target) {
  TrialResult t;
  const auto pre = column(w.pre, target);
  const auto post = column(w.post, target);
  t.pre_mean = mean_of(pre);
  t.post_mean = mean_of(post);
  t.baseline_sd = sample_sd(pre);
  t.delta = t.baseline_sd > 0.0 ? (t.post_mean - t.pre_mean) / t.baseline_sd : 0.0;
  t.effect_size = std::abs(t.delta);
  t.window = static_cast<int>(w.post.size());
  return t;
}

// max(0, relative change) with a zero guard on the reference level.
double relative_increase(double before, double after) {
  if (!(std::abs(before) > 1e-12)) return 0.0;
  return std::max(0.0, (after - before) / std::abs(before));
}

double relative_decrease(double before, double after) {
  if (!(std::abs(before) > 1e-12)) return 0.0;
  return std::max(0.0, (before - after) / std::abs(before));
}

}  // namespace

EdgeStatus adjudicate(const std::vector<TrialResult>& trials, double epsilon, bool majority_vote) {
  const auto passing = std::count_if(trials.begin(), trials.end(),
                                     [epsilon](const TrialResult& t) { return std::abs(t.delta) > epsilon; });
  if (majority_vote) return 2 * passing > static_cast<long>(trials.size()) ? EdgeStatus::Validated : EdgeStatus::Refuted;
  return passing > 0 ? EdgeStatus::Validated : EdgeStatus::Refuted;
}

std::vector<InterventionRecord> execute_multi(const InterventionPlan& plan, const std::vector<int>& extra_targets,
                                              ExecutionBackend& backend, Scheduler& scheduler, std::uint64_t& episode,
                                              const OutcomeVariables& outcomes) {
  const auto& cfg = plan.config;
  cfg.validate();
  const auto& vars = backend.variables();
  const int n_vars = static_cast<int>(vars.size());
  const int source = plan.edge.source;
  std::vector<int> targets{plan.edge.target};
  for (int t : extra_targets)
    if (t != source && std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
  for (int t : targets)
    if (t < 0 || t >= n_vars) throw InvalidArgument("plan edge outside the backend's variables");
  if (source < 0 || source >= n_vars) throw InvalidArgument("plan edge outside the backend's variables");
  if (!vars[static_cast<std::size_t>(source)].intervenable())
    throw NotIntervenable("'" + plan.source + "' is an output and cannot be intervened on");
  if (!vars[static_cast<std::size_t>(source)].bounds.contains(plan.target_value))
    throw OutOfBounds("intervention value outside the bounds of '" + plan.source + "'");

  // Window length follows the primary target only.
  std::vector<InterventionRecord> recs(targets.size());
  std::vector<Eigen::VectorXd> all_pre, all_post;
  for (int k = 0; k < cfg.n_trials; ++k) {
    const std::uint64_t ep = episode++;
    const double start = scheduler.earliest_start();
    Window w = run_window(backend, ep, source, plan.target_value, cfg.t_baseline, cfg.t_short);
    if (std::abs(summarise(w, targets[0]).delta) > cfg.delta_gate && cfg.t_long > cfg.t_short)
      w = run_window(backend, ep, source, plan.target_value, cfg.t_long, cfg.t_long);
    scheduler.book(start, static_cast<double>(w.pre.size() + w.post.size()) * backend.seconds_per_step());
    for (std::size_t r = 0; r < targets.size(); ++r) {
      TrialResult t = summarise(w, targets[r]);
      t.start_s = start;
      recs[r].trials.push_back(t);
      for (const auto& row : w.pre) recs[r].pre_target.push_back(row(targets[r]));
      for (const auto& row : w.post) recs[r].post_target.push_back(row(targets[r]));
    }
    all_pre.insert(all_pre.end(), w.pre.begin(), w.pre.end());
    all_post.insert(all_post.end(), w.post.begin(), w.post.end());
  }

  double satisfaction_loss = 0.0, energy_increase = 0.0;
  if (outcomes.satisfaction)
    satisfaction_loss = relative_decrease(mean_of(column(all_pre, *outcomes.satisfaction)),
                                          mean_of(column(all_post, *outcomes.satisfaction)));
  if (outcomes.energy)
    energy_increase = relative_increase(mean_of(column(all_pre, *outcomes.energy)),
                                        mean_of(column(all_post, *outcomes.energy)));
  const Regime regime = Regime::intervention(plan.source, plan.target_value);
  std::vector<Sample> post_samples;
  for (const auto& r : all_post) post_samples.push_back({r, cfg.pseudo_sample_weight, regime});

  for (std::size_t r = 0; r < targets.size(); ++r) {
    auto& rec = recs[r];
    rec.plan = plan;
    rec.plan.edge.target = targets[r];
    rec.plan.target = vars[static_cast<std::size_t>(targets[r])].name;
    rec.verdict = adjudicate(rec.trials, cfg.epsilon, cfg.majority_vote);
    rec.satisfaction_loss = satisfaction_loss;
    rec.energy_increase = energy_increase;
    const double n1 = static_cast<double>(rec.pre_target.size());
    const double n2 = static_cast<double>(rec.post_target.size());
    const double s1 = sample_sd(rec.pre_target), s2 = sample_sd(rec.post_target);
    const double pooled = n1 + n2 > 2 ? std::sqrt(((n1 - 1) * s1 * s1 + (n2 - 1) * s2 * s2) / (n1 + n2 - 2)) : 0.0;
    rec.cohens_d = pooled > 0.0 ? (mean_of(rec.post_target) - mean_of(rec.pre_target)) / pooled : 0.0;
    rec.post_samples = post_samples;
  }
  return recs;
}

InterventionRecord execute(const InterventionPlan& plan, ExecutionBackend& backend, Scheduler& scheduler,
                           std::uint64_t& episode, const OutcomeVariables& outcomes) {
  return std::move(execute_multi(plan, {}, backend, scheduler, episode, outcomes).front());
}

std::vector<Sample> to_pseudo_samples(const InterventionRecord& record) {
  std::vector<Sample> out = record.post_samples;
  for (auto& s : out) {
    s.weight = record.plan.config.pseudo_sample_weight;
    s.regime = Regime::intervention(record.plan.source, record.plan.target_value);
  }
  return out;
}

nlohmann::json record_to_json(const InterventionRecord& record) {
  const auto& p = record.plan;
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : record.trials)
    trials.push_back({{"pre_mean", t.pre_mean},
                      {"post_mean", t.post_mean},
                      {"baseline_sd", t.baseline_sd},
                      {"effect_size", t.effect_size},
                      {"delta", t.delta},
                      {"window", t.window},
                      {"start_s", t.start_s}});
  return {{"plan",
           {{"edge", {p.source, p.target}},
            {"target_value", p.target_value},
            {"origin", p.origin},
            {"n_trials", p.config.n_trials},
            {"t_baseline", p.config.t_baseline},
            {"t_short", p.config.t_short},
            {"t_long", p.config.t_long},
            {"delta_gate", p.config.delta_gate},
            {"epsilon", p.config.epsilon},
            {"min_spacing_s", p.config.min_spacing_s},
            {"daily_cap", p.config.daily_cap}}},
          {"trial_results", std::move(trials)},
          {"verdict", std::string(to_string(record.verdict))},
          {"satisfaction_loss", record.satisfaction_loss},
          {"energy_increase", record.energy_increase},
          {"cohens_d", record.cohens_d}};
}

std::string records_to_jsonl(const std::vector<InterventionRecord>& records) {
  std::string out;
  for (const auto& r : records) out += record_to_json(r).dump() + "\n";
  return out;
}

}  // namespace grid
