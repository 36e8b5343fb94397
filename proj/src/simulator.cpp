#include "grid/simulator.hpp"

#include "grid/backend.hpp"
#include "grid/errors.hpp"

#include <cmath>
#include <numbers>

namespace grid {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t zone_seed(std::uint64_t seed, int zone) {
  return zone == 0 ? seed : derive_seed(seed, 1000u + static_cast<std::uint64_t>(zone));
}

namespace detail {

struct CompiledTerm {
  int source = 0;
  TermShape shape = TermShape::Linear;
  double coefficient = 0.0;
  double center = 0.0;

  double operator()(const Eigen::VectorXd& v) const {
    const double d = v(source) - center;
    return coefficient * (shape == TermShape::Absolute ? std::abs(d) : d);
  }
};

struct LatentLink {
  int latent = 0;
  double coefficient = 0.0;
};

struct CompiledEquation {
  std::optional<ExogenousProcess> process;
  double intercept = 0.0;
  Link link = Link::Identity;
  std::vector<CompiledTerm> inner;
  std::vector<CompiledTerm> outer;
  double noise_sd = 0.0;
  std::vector<LatentLink> additive;
  std::vector<LatentLink> multiplicative;
};

struct CompiledScenario {
  ScenarioSpec spec;
  std::vector<int> order;
  std::vector<CompiledEquation> equations;  // indexed by variable
  Eigen::VectorXd sensor_sd;
  int coupled = -1;

  explicit CompiledScenario(const ScenarioSpec& s) : spec(s) {
    const int n = static_cast<int>(spec.variables.size());
    auto topo = topological_order(spec.ground_truth.adjacency());
    if (!topo) throw InvalidArgument("scenario ground truth is cyclic");
    order = *topo;
    equations.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const Equation& src = spec.equation(i);
      auto& eq = equations[static_cast<std::size_t>(i)];
      eq.process = src.process;
      eq.intercept = src.intercept;
      eq.link = src.link;
      eq.noise_sd = src.noise_sd;
      for (const auto& t : src.inner) eq.inner.push_back({spec.index_of(t.source), t.shape, t.coefficient, t.center});
      for (const auto& t : src.outer) eq.outer.push_back({spec.index_of(t.source), t.shape, t.coefficient, t.center});
    }
    for (int l = 0; l < static_cast<int>(spec.hidden.size()); ++l)
      for (const auto& e : spec.hidden[static_cast<std::size_t>(l)].effects) {
        auto& eq = equations[static_cast<std::size_t>(spec.index_of(e.target))];
        (e.multiplicative ? eq.multiplicative : eq.additive).push_back({l, e.coefficient});
      }
    sensor_sd = Eigen::VectorXd::Zero(n);
    for (const auto& [name, sd] : spec.noise_sd) sensor_sd(spec.index_of(name)) = sd;
    if (spec.coupling.active()) coupled = spec.index_of(spec.coupling.variable);
  }
};

}  // namespace detail

namespace {

using detail::CompiledScenario;

double draw_beta(std::mt19937_64& rng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

double sinusoid(const LatentSpec& l, long step) {
  return l.amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(step) / l.period + l.phase);
}

void init_latents(const CompiledScenario& m, ZoneState& z) {
  const auto& hidden = m.spec.hidden;
  z.latents = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hidden.size()));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t l = 0; l < hidden.size(); ++l) {
    const auto& spec = hidden[l];
    const auto li = static_cast<Eigen::Index>(l);
    switch (spec.kind) {
      case LatentKind::Beta:
        z.latents(li) = spec.low + (spec.high - spec.low) * draw_beta(z.process_rng, spec.alpha, spec.beta);
        break;
      case LatentKind::Markov: {
        const double stationary = spec.p_on / (spec.p_on + spec.p_off);
        z.latents(li) = unif(z.process_rng) < stationary ? 1.0 : 0.0;
        break;
      }
      case LatentKind::Sinusoid: z.latents(li) = sinusoid(spec, 0); break;
    }
  }
}

void step_latents(const CompiledScenario& m, ZoneState& z, long step) {
  const auto& hidden = m.spec.hidden;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t l = 0; l < hidden.size(); ++l) {
    const auto& spec = hidden[l];
    const auto li = static_cast<Eigen::Index>(l);
    switch (spec.kind) {
      case LatentKind::Beta:
        if (spec.hold <= 1 || step % spec.hold == 0)
          z.latents(li) = spec.low + (spec.high - spec.low) * draw_beta(z.process_rng, spec.alpha, spec.beta);
        break;
      case LatentKind::Markov: {
        const double u = unif(z.process_rng);
        if (z.latents(li) > 0.5) {
          if (u < spec.p_off) z.latents(li) = 0.0;
        } else if (u < spec.p_on) {
          z.latents(li) = 1.0;
        }
        break;
      }
      case LatentKind::Sinusoid: z.latents(li) = sinusoid(spec, step); break;
    }
  }
}

// One innovation per variable for the process and one for structural noise,
// drawn whether or not the variable is intervened on, so the random stream
// does not depend on the intervention schedule.
void draw_innovations(const CompiledScenario& m, ZoneState& z, bool initial) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(m.equations.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& eq = m.equations[static_cast<std::size_t>(i)];
    const double xi = normal(z.process_rng);
    if (eq.process) {
      const double phi = eq.process->persistence;
      z.ar(i) = initial ? eq.process->sd * xi
                        : phi * z.ar(i) + eq.process->sd * std::sqrt(1.0 - phi * phi) * xi;
    }
    z.innovation(i) = normal(z.process_rng);
  }
}

void evaluate_zone(const CompiledScenario& m, std::vector<ZoneState>& zones, int zone,
                   const std::map<int, double>* interventions) {
  ZoneState& z = zones[static_cast<std::size_t>(zone)];
  const auto& vars = m.spec.variables;
  for (int i : m.order) {
    if (interventions) {
      if (auto it = interventions->find(i); it != interventions->end()) {
        z.values(i) = it->second;
        continue;
      }
    }
    const auto& eq = m.equations[static_cast<std::size_t>(i)];
    double v = eq.intercept;
    if (eq.process) v += eq.process->mean + z.ar(i);
    if (!eq.inner.empty()) {
      double u = 0.0;
      for (const auto& t : eq.inner) u += t(z.values);
      v += eq.link == Link::Comfort ? 100.0 * (1.0 - ppd_proxy(u, m.spec.comfort_slope)) : u;
    } else if (eq.link == Link::Comfort) {
      v += 100.0 * (1.0 - ppd_proxy(0.0, m.spec.comfort_slope));
    }
    for (const auto& t : eq.outer) v += t(z.values);
    v += eq.noise_sd * z.innovation(i);
    for (const auto& l : eq.multiplicative) v *= l.coefficient * z.latents(l.latent);
    for (const auto& l : eq.additive) v += l.coefficient * z.latents(l.latent);
    if (i == m.coupled && z.previous.size() > 0) {
      const auto& k = m.spec.coupling.matrix;
      for (int other = 0; other < static_cast<int>(zones.size()); ++other) {
        if (other == zone || k(zone, other) == 0.0) continue;
        v += k(zone, other) * (zones[static_cast<std::size_t>(other)].previous(i) - z.previous(i));
      }
    }
    z.values(i) = vars[static_cast<std::size_t>(i)].bounds.clamp(v);
  }
}

void evaluate_all(SimState& state) {
  for (int zone = 0; zone < static_cast<int>(state.zones.size()); ++zone)
    evaluate_zone(*state.model, state.zones, zone, zone == state.active_zone ? &state.interventions : nullptr);
}

}  // namespace

SimState initial_state(const ScenarioSpec& spec, std::uint64_t seed) {
  SimState state;
  state.rng_seed = seed;
  state.model = std::make_shared<const CompiledScenario>(spec);
  const auto n = static_cast<Eigen::Index>(spec.variables.size());
  for (int zone = 0; zone < spec.zones; ++zone) {
    ZoneState z;
    const std::uint64_t s = zone_seed(seed, zone);
    z.process_rng.seed(s);
    z.sensor_rng.seed(derive_seed(s, 77));
    z.ar = Eigen::VectorXd::Zero(n);
    z.innovation = Eigen::VectorXd::Zero(n);
    z.values = Eigen::VectorXd::Zero(n);
    init_latents(*state.model, z);
    draw_innovations(*state.model, z, true);
    state.zones.push_back(std::move(z));
  }
  evaluate_all(state);
  return state;
}

void advance(SimState& state) {
  ++state.step_index;
  for (auto& z : state.zones) {
    z.previous = z.values;
    draw_innovations(*state.model, z, false);
    step_latents(*state.model, z, state.step_index);
  }
  evaluate_all(state);
}

Eigen::VectorXd measure(SimState& state, int zone) {
  auto& z = state.zones.at(static_cast<std::size_t>(zone));
  const auto& m = *state.model;
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd out = z.values;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (m.sensor_sd(i) <= 0.0) continue;
    out(i) = m.spec.variables[static_cast<std::size_t>(i)].bounds.clamp(out(i) + m.sensor_sd(i) * normal(z.sensor_rng));
  }
  return out;
}

std::vector<Sample> generate_observational(const ScenarioSpec& spec, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw InvalidArgument("n_samples must be >= 1");
  SimState state = initial_state(spec, seed);
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(n_samples));
  while (true) {
    for (int zone = 0; zone < spec.zones; ++zone) {
      out.push_back({measure(state, zone), 1.0, Regime::observational()});
      if (static_cast<int>(out.size()) == n_samples) return out;
    }
    advance(state);
  }
}

SimState apply_do(SimState state, const ScenarioSpec& spec, const std::string& var, double value) {
  const int i = spec.index_of(var);
  const Variable& v = spec.variables[static_cast<std::size_t>(i)];
  if (!v.intervenable()) throw NotIntervenable("'" + var + "' is an output and cannot be intervened on");
  if (!v.bounds.contains(value))
    throw OutOfBounds("do(" + var + "=" + format_number(value) + ") outside [" + format_number(v.bounds.low) + ", " +
                      format_number(v.bounds.high) + "]");
  state.interventions[i] = value;
  evaluate_zone(*state.model, state.zones, state.active_zone, &state.interventions);
  return state;
}

SimState release_do(SimState state) {
  state.interventions.clear();
  evaluate_zone(*state.model, state.zones, state.active_zone, nullptr);
  return state;
}

TrialSamples run_intervention_trial(const ScenarioSpec& spec, SimState& state, const std::string& var, double value,
                                    int t_baseline, int t_hold) {
  if (t_baseline < 2 || t_hold < 2) throw InvalidArgument("trial windows need at least 2 steps");
  const int active = state.active_zone;
  TrialSamples out;
  const SimState start = state;
  for (int t = 0; t < t_baseline; ++t) {
    advance(state);
    out.pre.push_back({measure(state, active), 1.0, Regime::observational()});
    out.pre_latents.push_back(state.hidden_states(active));
  }
  std::vector<std::mt19937_64> sensors;
  for (const auto& z : state.zones) sensors.push_back(z.sensor_rng);
  SimState replay = start;
  for (std::size_t z = 0; z < sensors.size(); ++z) replay.zones[z].sensor_rng = sensors[z];
  replay = apply_do(std::move(replay), spec, var, value);
  const Regime regime = Regime::intervention(var, value);
  for (int t = 0; t < t_hold; ++t) {
    advance(replay);
    out.post.push_back({measure(replay, active), 1.0, regime});
    out.post_latents.push_back(replay.hidden_states(active));
  }
  state = release_do(std::move(replay));
  return out;
}

double complexity_score(const ScenarioSpec& spec) {
  const auto& w = spec.complexity;
  const double n = static_cast<double>(spec.variables.size());
  bool noisy = false;
  for (const auto& [name, sd] : spec.noise_sd) noisy = noisy || sd > 0.0;
  const double r = noisy ? 1.0 : 0.0;
  const double h = spec.hidden.empty() ? 0.0 : 1.0;
  const double z = spec.zones > 1 ? 1.0 : 0.0;
  return n + w.alpha * w.intervenable + w.beta * r + w.gamma * h + w.delta * z;
}

// ---------------------------------------------------------------------------

SimulatorBackend::SimulatorBackend(ScenarioSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), seed_(seed), state_(initial_state(spec_, derive_seed(seed, 0))) {}

const std::vector<Variable>& SimulatorBackend::variables() const { return spec_.variables; }

void SimulatorBackend::reset(std::uint64_t episode) {
  std::vector<std::mt19937_64> sensors;
  for (const auto& z : state_.zones) sensors.push_back(z.sensor_rng);
  state_ = initial_state(spec_, derive_seed(seed_, episode + 1));
  for (std::size_t z = 0; z < sensors.size(); ++z) state_.zones[z].sensor_rng = sensors[z];
}

Eigen::VectorXd SimulatorBackend::observe() { return measure(state_, state_.active_zone); }

void SimulatorBackend::intervene(int variable, double value) {
  state_ = apply_do(std::move(state_), spec_, spec_.variables.at(static_cast<std::size_t>(variable)).name, value);
}

void SimulatorBackend::step() { advance(state_); }

}  // namespace grid
