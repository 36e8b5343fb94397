#include "grid/scenario.hpp"

#include "grid/errors.hpp"
#include "grid/graph_json.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace grid {

std::string_view to_string(ScenarioName name) {
  switch (name) {
    case ScenarioName::Base: return "base";
    case ScenarioName::Noisy: return "noisy";
    case ScenarioName::Hidden: return "hidden";
    case ScenarioName::LargeSim: return "largesim";
  }
  return "base";
}

ScenarioName scenario_name_from_string(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  lower.erase(std::remove(lower.begin(), lower.end(), '-'), lower.end());
  lower.erase(std::remove(lower.begin(), lower.end(), '_'), lower.end());
  if (lower == "base") return ScenarioName::Base;
  if (lower == "noisy") return ScenarioName::Noisy;
  if (lower == "hidden") return ScenarioName::Hidden;
  if (lower == "largesim" || lower == "large") return ScenarioName::LargeSim;
  throw InvalidArgument("unknown scenario '" + std::string(text) + "'");
}

double Term::evaluate(double x) const {
  const double d = x - center;
  return coefficient * (shape == TermShape::Absolute ? std::abs(d) : d);
}

double ppd_proxy(double pmv, double slope) {
  // Anchored so that a neutral vote leaves 5% dissatisfied.
  static const double offset = std::log(19.0);
  return 1.0 / (1.0 + std::exp(-(slope * std::abs(pmv) - offset)));
}

int ScenarioSpec::index_of(std::string_view variable) const {
  for (int i = 0; i < static_cast<int>(variables.size()); ++i)
    if (variables[static_cast<std::size_t>(i)].name == variable) return i;
  throw InvalidArgument("scenario has no variable '" + std::string(variable) + "'");
}

const Equation& ScenarioSpec::equation(int variable) const {
  const auto& name = variables.at(static_cast<std::size_t>(variable)).name;
  for (const auto& eq : equations)
    if (eq.target == name) return eq;
  throw InvalidArgument("no equation for '" + name + "'");
}

DirectedGraph ScenarioSpec::implied_graph() const {
  DirectedGraph g(variables);
  AdjacencyMatrix a = g.adjacency();
  for (const auto& eq : equations) {
    const int t = g.require_index(eq.target);
    for (const auto* terms : {&eq.inner, &eq.outer})
      for (const auto& term : *terms)
        if (auto s = g.index_of(term.source)) a(*s, t) = 1;
  }
  return g.with_adjacency(std::move(a));
}

void ScenarioSpec::validate() const {
  if (variables.empty()) throw InvalidArgument("scenario has no variables");
  if (!ground_truth.same_nodes(DirectedGraph(variables)))
    throw InvalidArgument("ground truth nodes differ from scenario variables");
  if (!is_acyclic(ground_truth)) throw InvalidArgument("ground truth is cyclic");
  if (!(apply_constraints(ground_truth, constraints) == ground_truth))
    throw InvalidArgument("ground truth violates the structural constraints");
  if (equations.size() != variables.size()) throw InvalidArgument("need exactly one equation per variable");
  std::set<std::string> latent_names;
  for (const auto& l : hidden) latent_names.insert(l.name);
  for (const auto& eq : equations) {
    index_of(eq.target);
    if (eq.noise_sd < 0.0) throw InvalidArgument("negative structural noise for '" + eq.target + "'");
    for (const auto* terms : {&eq.inner, &eq.outer})
      for (const auto& term : *terms) {
        const bool observed = std::any_of(variables.begin(), variables.end(),
                                          [&](const Variable& v) { return v.name == term.source; });
        if (!observed) throw InvalidArgument("term source '" + term.source + "' is not an observed variable");
      }
  }
  if (!(implied_graph() == ground_truth))
    throw InvalidArgument("structural equations do not match the ground-truth graph");
  for (const auto& [name, sd] : noise_sd) {
    index_of(name);
    if (sd < 0.0) throw InvalidArgument("negative measurement noise for '" + name + "'");
  }
  for (const auto& l : hidden)
    for (const auto& e : l.effects) index_of(e.target);
  if (zones < 1) throw InvalidArgument("zones must be >= 1");
  if (coupling.matrix.size() > 0) {
    if (coupling.matrix.rows() != zones || coupling.matrix.cols() != zones)
      throw InvalidArgument("coupling matrix must be zones x zones");
    index_of(coupling.variable);
  }
  constraints.validate();
}

namespace {

Variable var(std::string name, VariableKind kind, std::string unit, double lo, double hi) {
  return {std::move(name), kind, std::move(unit), {lo, hi}};
}

Term lin(std::string source, double coef, double center = 0.0) {
  return {std::move(source), TermShape::Linear, coef, center};
}

Term absd(std::string source, double coef, double center) {
  return {std::move(source), TermShape::Absolute, coef, center};
}

DirectedGraph finish_ground_truth(ScenarioSpec& spec) {
  spec.ground_truth = spec.implied_graph();
  return spec.ground_truth;
}

}  // namespace

// Room model constants. Energy is a part-load style deviation cost; the
// satisfaction penalty re-uses the noise-free energy demand so that the
// energy output itself never becomes a parent of satisfaction.
namespace room {
constexpr double kEnergyTemp = 6.0;       // a1, % per °C away from 22 °C
constexpr double kEnergyHumidity = 10.0;  // a2, % per 20 %RH away from 50 %RH
constexpr double kEnergyAir = 40.0;       // a3, % at AQI 500
constexpr double kPenalty = 0.4;          // a4, satisfaction points per % energy
constexpr double kPmvTemp = 0.35;
constexpr double kPmvHumidity = 0.04;
}  // namespace room

ScenarioSpec base_scenario(bool extended_ground_truth) {
  using namespace room;
  ScenarioSpec s;
  s.name = ScenarioName::Base;
  s.variables = {
      var("Temperature", VariableKind::Input, "degC", 18.0, 30.0),
      var("Humidity", VariableKind::Input, "%RH", 30.0, 70.0),
      var("AirQuality", VariableKind::Input, "AQI", 0.0, 500.0),
      var("EnergyConsumption", VariableKind::Output, "%", 0.0, 100.0),
      var("OverallSatisfaction", VariableKind::Output, "%", 0.0, 100.0),
  };

  Equation temperature{.target = "Temperature", .process = ExogenousProcess{23.5, 1.5, 0.6}};
  Equation humidity{.target = "Humidity", .process = ExogenousProcess{45.0, 6.0, 0.6}};
  Equation air{.target = "AirQuality", .process = ExogenousProcess{90.0, 30.0, 0.6}};
  if (extended_ground_truth) {
    humidity.outer.push_back(lin("Temperature", 1.5, 23.5));
    air.outer.push_back(lin("Humidity", 2.0, 45.0));
  }

  Equation energy{.target = "EnergyConsumption", .noise_sd = 1.0};
  energy.inner = {absd("Temperature", kEnergyTemp, 22.0), absd("Humidity", kEnergyHumidity / 20.0, 50.0),
                  lin("AirQuality", kEnergyAir / 500.0)};

  Equation satisfaction{.target = "OverallSatisfaction", .link = Link::Comfort, .noise_sd = 1.0};
  satisfaction.inner = {lin("Temperature", kPmvTemp, 22.0), lin("Humidity", kPmvHumidity, 50.0)};
  satisfaction.outer = {absd("Temperature", -kPenalty * kEnergyTemp, 22.0),
                        absd("Humidity", -kPenalty * kEnergyHumidity / 20.0, 50.0),
                        lin("AirQuality", -kPenalty * kEnergyAir / 500.0)};

  s.equations = {temperature, humidity, air, energy, satisfaction};
  s.complexity.intervenable = 0;
  finish_ground_truth(s);
  s.validate();
  return s;
}

ScenarioSpec noisy_scenario() {
  ScenarioSpec s = base_scenario();
  s.name = ScenarioName::Noisy;
  s.variables[0].bounds = {18.0, 40.0};
  s.ground_truth = DirectedGraph(s.variables, s.ground_truth.edges());
  s.noise_sd = {{"Temperature", 0.2}, {"Humidity", 2.0}, {"AirQuality", 15.0}};
  s.validate();
  return s;
}

ScenarioSpec hidden_scenario() {
  ScenarioSpec s = base_scenario();
  s.name = ScenarioName::Hidden;
  LatentSpec efficiency{.name = "HVACEfficiency", .kind = LatentKind::Beta, .alpha = 8.0, .beta = 8.0,
                        .low = 0.7, .high = 1.3, .hold = 50};
  efficiency.effects = {{"EnergyConsumption", 1.0, true}};
  LatentSpec occupancy{.name = "Occupancy", .kind = LatentKind::Markov, .p_on = 0.05, .p_off = 0.05};
  occupancy.effects = {{"EnergyConsumption", 5.0, false}, {"AirQuality", 60.0, false}};
  LatentSpec outdoor{.name = "OutdoorTemperature", .kind = LatentKind::Sinusoid, .amplitude = 1.5,
                     .period = 288.0};
  outdoor.effects = {{"Temperature", 1.0, false}};
  s.hidden = {efficiency, occupancy, outdoor};
  s.validate();
  return s;
}

ScenarioSpec large_sim_scenario() {
  ScenarioSpec s;
  s.name = ScenarioName::LargeSim;
  s.environment = "multi-zone office building";
  s.variables = {
      var("Occupancy", VariableKind::Input, "persons", 0.0, 40.0),
      var("CoolingSetpoint", VariableKind::Input, "degC", 20.0, 28.0),
      var("SupplyAirflow", VariableKind::Input, "fraction", 0.1, 1.0),
      var("LightingLevel", VariableKind::Input, "lux", 0.0, 1000.0),
      var("WindowOpening", VariableKind::Input, "fraction", 0.0, 1.0),
      var("HumiditySetpoint", VariableKind::Input, "%RH", 30.0, 70.0),
      var("ZoneTemperature", VariableKind::Mediator, "degC", 14.0, 36.0),
      var("ZoneHumidity", VariableKind::Mediator, "%RH", 15.0, 90.0),
      var("IndoorAirQuality", VariableKind::Mediator, "AQI", 0.0, 500.0),
      var("HVACLoad", VariableKind::Mediator, "kW", 0.0, 60.0),
      var("EnergyConsumption", VariableKind::Output, "%", 0.0, 100.0),
      var("ThermalComfort", VariableKind::Output, "%", 0.0, 100.0),
      var("OverallSatisfaction", VariableKind::Output, "%", 0.0, 100.0),
  };
  std::vector<Equation> eq;
  eq.push_back({.target = "Occupancy", .process = ExogenousProcess{12.0, 5.0, 0.6}});
  eq.push_back({.target = "CoolingSetpoint", .process = ExogenousProcess{24.0, 1.2, 0.6}});
  eq.push_back({.target = "SupplyAirflow", .process = ExogenousProcess{0.5, 0.12, 0.6}});
  eq.push_back({.target = "LightingLevel", .process = ExogenousProcess{450.0, 120.0, 0.6}});
  eq.push_back({.target = "WindowOpening", .process = ExogenousProcess{0.3, 0.12, 0.6}});
  eq.push_back({.target = "HumiditySetpoint", .process = ExogenousProcess{50.0, 4.0, 0.6}});

  Equation zone_temp{.target = "ZoneTemperature", .intercept = 2.0, .noise_sd = 0.4};
  zone_temp.outer = {lin("CoolingSetpoint", 0.8), lin("Occupancy", 0.08), lin("LightingLevel", 0.003),
                     lin("WindowOpening", 3.0)};
  Equation zone_hum{.target = "ZoneHumidity", .intercept = 10.0, .noise_sd = 1.5};
  zone_hum.outer = {lin("HumiditySetpoint", 0.7), lin("Occupancy", 0.25), lin("WindowOpening", 8.0)};
  Equation iaq{.target = "IndoorAirQuality", .intercept = 60.0, .noise_sd = 8.0};
  iaq.outer = {lin("Occupancy", 4.0), lin("SupplyAirflow", -80.0), lin("WindowOpening", -40.0)};
  Equation load{.target = "HVACLoad", .intercept = 5.0, .noise_sd = 0.8};
  load.outer = {lin("ZoneTemperature", 1.5), lin("CoolingSetpoint", -0.3), lin("SupplyAirflow", 8.0),
                absd("ZoneHumidity", 0.15, 50.0)};
  Equation energy{.target = "EnergyConsumption", .intercept = 5.0, .noise_sd = 1.5};
  energy.outer = {lin("HVACLoad", 2.0), lin("LightingLevel", 0.02)};
  Equation comfort{.target = "ThermalComfort", .link = Link::Comfort, .noise_sd = 1.0};
  comfort.inner = {lin("ZoneTemperature", 0.35, 23.5), lin("ZoneHumidity", 0.03, 50.0)};
  Equation sat{.target = "OverallSatisfaction", .link = Link::Comfort, .noise_sd = 1.5};
  sat.inner = {lin("ZoneTemperature", 0.3, 23.5), lin("ZoneHumidity", 0.025, 50.0)};
  sat.outer = {lin("IndoorAirQuality", -0.08), lin("LightingLevel", -0.01, 450.0)};
  eq.insert(eq.end(), {zone_temp, zone_hum, iaq, load, energy, comfort, sat});
  s.equations = std::move(eq);

  s.noise_sd = {{"ZoneTemperature", 0.2}, {"ZoneHumidity", 2.0}, {"IndoorAirQuality", 15.0}};
  LatentSpec outdoor{.name = "OutdoorTemperature", .kind = LatentKind::Sinusoid, .amplitude = 1.0,
                     .period = 288.0};
  outdoor.effects = {{"ZoneTemperature", 1.0, false}};
  LatentSpec efficiency{.name = "HVACEfficiency", .kind = LatentKind::Beta, .alpha = 8.0, .beta = 8.0,
                        .low = 0.8, .high = 1.2, .hold = 50};
  efficiency.effects = {{"HVACLoad", 1.0, true}};
  s.hidden = {outdoor, efficiency};

  s.zones = 5;
  s.coupling.variable = "ZoneTemperature";
  s.coupling.matrix = Eigen::MatrixXd::Zero(5, 5);
  for (int z = 0; z < 5; ++z) {
    s.coupling.matrix(z, (z + 1) % 5) = 0.1;
    s.coupling.matrix(z, (z + 4) % 5) = 0.1;
  }
  s.complexity.intervenable = 6;
  s.default_samples = 2000;
  finish_ground_truth(s);
  s.validate();
  return s;
}

ScenarioSpec builtin_scenario(std::string_view name) {
  switch (scenario_name_from_string(name)) {
    case ScenarioName::Base: return base_scenario();
    case ScenarioName::Noisy: return noisy_scenario();
    case ScenarioName::Hidden: return hidden_scenario();
    case ScenarioName::LargeSim: return large_sim_scenario();
  }
  return base_scenario();
}

std::vector<std::string> builtin_scenario_names() { return {"base", "noisy", "hidden", "largesim"}; }

// ---------------------------------------------------------------------------
// JSON

namespace {

nlohmann::json term_to_json(const Term& t) {
  return {{"source", t.source},
          {"shape", t.shape == TermShape::Absolute ? "abs" : "linear"},
          {"coefficient", t.coefficient},
          {"center", t.center}};
}

Term term_from_json(const nlohmann::json& j) {
  Term t;
  t.source = j.at("source").get<std::string>();
  const auto shape = j.value("shape", std::string("linear"));
  if (shape == "abs") t.shape = TermShape::Absolute;
  else if (shape == "linear") t.shape = TermShape::Linear;
  else throw InvalidArgument("unknown term shape '" + shape + "'");
  t.coefficient = j.at("coefficient").get<double>();
  t.center = j.value("center", 0.0);
  return t;
}

std::string latent_kind_name(LatentKind k) {
  switch (k) {
    case LatentKind::Beta: return "beta";
    case LatentKind::Markov: return "markov";
    case LatentKind::Sinusoid: return "sinusoid";
  }
  return "beta";
}

LatentKind latent_kind_from(const std::string& s) {
  if (s == "beta") return LatentKind::Beta;
  if (s == "markov") return LatentKind::Markov;
  if (s == "sinusoid") return LatentKind::Sinusoid;
  throw InvalidArgument("unknown latent kind '" + s + "'");
}

}  // namespace

nlohmann::json scenario_to_json(const ScenarioSpec& spec) {
  nlohmann::json doc;
  doc["name"] = std::string(to_string(spec.name));
  doc["environment"] = spec.environment;
  doc["variables"] = nlohmann::json::array();
  for (const auto& v : spec.variables) doc["variables"].push_back(variable_to_json(v));
  doc["ground_truth"] = graph_to_json(spec.ground_truth);
  doc["equations"] = nlohmann::json::array();
  for (const auto& eq : spec.equations) {
    nlohmann::json e{{"target", eq.target},
                     {"intercept", eq.intercept},
                     {"link", eq.link == Link::Comfort ? "comfort" : "identity"},
                     {"noise_sd", eq.noise_sd},
                     {"inner", nlohmann::json::array()},
                     {"outer", nlohmann::json::array()}};
    if (eq.process)
      e["process"] = {{"mean", eq.process->mean}, {"sd", eq.process->sd}, {"persistence", eq.process->persistence}};
    for (const auto& t : eq.inner) e["inner"].push_back(term_to_json(t));
    for (const auto& t : eq.outer) e["outer"].push_back(term_to_json(t));
    doc["equations"].push_back(std::move(e));
  }
  doc["noise_sd"] = spec.noise_sd;
  doc["hidden"] = nlohmann::json::array();
  for (const auto& l : spec.hidden) {
    nlohmann::json j{{"name", l.name}, {"kind", latent_kind_name(l.kind)}, {"effects", nlohmann::json::array()}};
    switch (l.kind) {
      case LatentKind::Beta:
        j.update({{"alpha", l.alpha}, {"beta", l.beta}, {"low", l.low}, {"high", l.high}, {"hold", l.hold}});
        break;
      case LatentKind::Markov: j.update({{"p_on", l.p_on}, {"p_off", l.p_off}}); break;
      case LatentKind::Sinusoid:
        j.update({{"amplitude", l.amplitude}, {"period", l.period}, {"phase", l.phase}});
        break;
    }
    for (const auto& e : l.effects)
      j["effects"].push_back({{"target", e.target}, {"coefficient", e.coefficient}, {"multiplicative", e.multiplicative}});
    doc["hidden"].push_back(std::move(j));
  }
  doc["zones"] = spec.zones;
  if (spec.coupling.matrix.size() > 0) {
    nlohmann::json m = nlohmann::json::array();
    for (Eigen::Index r = 0; r < spec.coupling.matrix.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < spec.coupling.matrix.cols(); ++c) row.push_back(spec.coupling.matrix(r, c));
      m.push_back(std::move(row));
    }
    doc["coupling"] = {{"variable", spec.coupling.variable}, {"matrix", std::move(m)}};
  }
  doc["complexity_weights"] = {{"alpha", spec.complexity.alpha},
                               {"beta", spec.complexity.beta},
                               {"gamma", spec.complexity.gamma},
                               {"delta", spec.complexity.delta},
                               {"intervenable", spec.complexity.intervenable}};
  nlohmann::json forbidden = nlohmann::json::array();
  for (const auto& [s, t] : spec.constraints.forbidden_edges) forbidden.push_back({s, t});
  nlohmann::json required = nlohmann::json::array();
  for (const auto& [s, t] : spec.constraints.required_orientations) required.push_back({s, t});
  doc["constraints"] = {{"forbid_output_sources", spec.constraints.forbid_output_sources},
                        {"forbidden_edges", std::move(forbidden)},
                        {"required_orientations", std::move(required)}};
  doc["comfort_slope"] = spec.comfort_slope;
  doc["energy_variable"] = spec.energy_variable;
  doc["satisfaction_variable"] = spec.satisfaction_variable;
  doc["default_samples"] = spec.default_samples;
  return doc;
}

ScenarioSpec scenario_from_json(const nlohmann::json& doc) {
  ScenarioSpec s;
  s.name = scenario_name_from_string(doc.at("name").get<std::string>());
  s.environment = doc.value("environment", s.environment);
  for (const auto& v : doc.at("variables")) s.variables.push_back(variable_from_json(v));
  for (const auto& e : doc.at("equations")) {
    Equation eq;
    eq.target = e.at("target").get<std::string>();
    eq.intercept = e.value("intercept", 0.0);
    const auto link = e.value("link", std::string("identity"));
    if (link == "comfort") eq.link = Link::Comfort;
    else if (link != "identity") throw InvalidArgument("unknown link '" + link + "'");
    eq.noise_sd = e.value("noise_sd", 0.0);
    if (e.contains("process")) {
      const auto& p = e["process"];
      eq.process = ExogenousProcess{p.at("mean").get<double>(), p.at("sd").get<double>(),
                                    p.value("persistence", 0.5)};
    }
    if (e.contains("inner"))
      for (const auto& t : e["inner"]) eq.inner.push_back(term_from_json(t));
    if (e.contains("outer"))
      for (const auto& t : e["outer"]) eq.outer.push_back(term_from_json(t));
    s.equations.push_back(std::move(eq));
  }
  if (doc.contains("noise_sd")) s.noise_sd = doc["noise_sd"].get<std::map<std::string, double>>();
  if (doc.contains("hidden"))
    for (const auto& j : doc["hidden"]) {
      LatentSpec l;
      l.name = j.at("name").get<std::string>();
      l.kind = latent_kind_from(j.at("kind").get<std::string>());
      l.alpha = j.value("alpha", l.alpha);
      l.beta = j.value("beta", l.beta);
      l.low = j.value("low", l.low);
      l.high = j.value("high", l.high);
      l.hold = j.value("hold", l.hold);
      l.p_on = j.value("p_on", l.p_on);
      l.p_off = j.value("p_off", l.p_off);
      l.amplitude = j.value("amplitude", l.amplitude);
      l.period = j.value("period", l.period);
      l.phase = j.value("phase", l.phase);
      for (const auto& e : j.value("effects", nlohmann::json::array()))
        l.effects.push_back({e.at("target").get<std::string>(), e.at("coefficient").get<double>(),
                             e.value("multiplicative", false)});
      s.hidden.push_back(std::move(l));
    }
  s.zones = doc.value("zones", 1);
  if (doc.contains("coupling")) {
    const auto& c = doc["coupling"];
    s.coupling.variable = c.at("variable").get<std::string>();
    const auto& m = c.at("matrix");
    s.coupling.matrix.resize(static_cast<Eigen::Index>(m.size()), m.empty() ? 0 : static_cast<Eigen::Index>(m[0].size()));
    for (std::size_t r = 0; r < m.size(); ++r)
      for (std::size_t col = 0; col < m[r].size(); ++col)
        s.coupling.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col)) = m[r][col].get<double>();
  }
  if (doc.contains("complexity_weights")) {
    const auto& w = doc["complexity_weights"];
    s.complexity.alpha = w.value("alpha", 1.0);
    s.complexity.beta = w.value("beta", 1.0);
    s.complexity.gamma = w.value("gamma", 1.0);
    s.complexity.delta = w.value("delta", 1.0);
    s.complexity.intervenable = w.value("intervenable", 0);
  }
  if (doc.contains("constraints")) {
    const auto& c = doc["constraints"];
    s.constraints.forbid_output_sources = c.value("forbid_output_sources", true);
    for (const auto& e : c.value("forbidden_edges", nlohmann::json::array()))
      s.constraints.forbidden_edges.insert({e.at(0).get<std::string>(), e.at(1).get<std::string>()});
    for (const auto& e : c.value("required_orientations", nlohmann::json::array()))
      s.constraints.required_orientations.insert({e.at(0).get<std::string>(), e.at(1).get<std::string>()});
  }
  s.comfort_slope = doc.value("comfort_slope", s.comfort_slope);
  s.energy_variable = doc.value("energy_variable", s.energy_variable);
  s.satisfaction_variable = doc.value("satisfaction_variable", s.satisfaction_variable);
  s.default_samples = doc.value("default_samples", s.default_samples);
  s.ground_truth = doc.contains("ground_truth") ? graph_from_json(doc["ground_truth"], s.variables)
                                                : s.implied_graph();
  s.validate();
  return s;
}

}  // namespace grid
