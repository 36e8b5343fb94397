#include "grid/benchmark.hpp"

#include "grid/errors.hpp"
#include "grid/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>
#include <sstream>

namespace grid {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::GRID: return "GRID";
    case Method::GRID_O: return "GRID-O";
    case Method::PCOnly: return "PC-only";
    case Method::NSEMOnly: return "NSEM-only";
    case Method::LLMOnly: return "LLM-only";
  }
  return "GRID";
}

Method method_from_string(std::string_view text) {
  std::string key;
  for (char c : text)
    if (c != '-' && c != '_') key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (key == "grid") return Method::GRID;
  if (key == "grido") return Method::GRID_O;
  if (key == "pconly" || key == "pc") return Method::PCOnly;
  if (key == "nsemonly" || key == "nsem" || key == "samonly") return Method::NSEMOnly;
  if (key == "llmonly" || key == "llm") return Method::LLMOnly;
  throw InvalidArgument("unknown method '" + std::string(text) + "'");
}

LoopConfig scenario_loop_config(const ScenarioSpec& spec, std::uint64_t seed, LoopConfig base) {
  base.seed = seed;
  base.constraints = spec.constraints;
  base.environment = spec.environment;
  base.satisfaction_variable = spec.satisfaction_variable;
  base.energy_variable = spec.energy_variable;
  base.ground_truth = spec.ground_truth;
  return base;
}

LoopConfig method_config(LoopConfig cfg, Method m) {
  switch (m) {
    case Method::GRID: break;
    case Method::GRID_O: cfg.enable_validation = false; break;
    case Method::PCOnly: cfg.generators = {Generator::PC}; cfg.enable_validation = false; break;
    case Method::NSEMOnly: cfg.generators = {Generator::NSEM}; cfg.enable_validation = false; break;
    case Method::LLMOnly: cfg.generators = {Generator::LLM}; cfg.enable_validation = false; break;
  }
  return cfg;
}

ScenarioRun prepare_scenario_run(const ScenarioSpec& spec, std::uint64_t seed, int n_samples) {
  const int n = n_samples > 0 ? n_samples : spec.default_samples;
  return {Dataset::from_samples(spec.variables, generate_observational(spec, n, derive_seed(seed, 1))),
          SimulatorBackend(spec, derive_seed(seed, 2))};
}

std::vector<InterventionRecord> probe_false_positives(const ScenarioSpec& spec, std::uint64_t seed,
                                                      const DirectedGraph& g_hat, const Dataset& data,
                                                      const std::vector<InterventionRecord>& records,
                                                      const InterventionConfig& config) {
  std::set<Edge> covered;
  for (const auto& r : records) covered.insert(r.plan.edge);
  SimulatorBackend backend(spec, derive_seed(seed, 3));
  Scheduler scheduler(config.min_spacing_s, config.stabilization_s, config.daily_cap);
  std::uint64_t episode = 0;
  const auto outcomes = OutcomeVariables::from_names(spec.variables, spec.satisfaction_variable, spec.energy_variable);
  std::vector<InterventionRecord> out;
  for (const auto& e : false_positive_edges(spec.ground_truth, g_hat)) {
    if (covered.count(e) || !spec.variables[static_cast<std::size_t>(e.source)].intervenable()) continue;
    const auto plan = design_intervention(e, spec.variables, data.observational_mean(e.source), config);
    out.push_back(execute(plan, backend, scheduler, episode, outcomes));
  }
  return out;
}

CellResult run_cell(const ScenarioSpec& spec, std::uint64_t seed, Method method, const PriorProvider* provider,
                    const LoopConfig& base, int n_samples) {
  CellResult cell;
  cell.scenario = std::string(to_string(spec.name));
  cell.seed = seed;
  cell.method = method;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    auto cfg = method_config(scenario_loop_config(spec, seed, base), method);
    auto prepared = prepare_scenario_run(spec, seed, n_samples);
    RunReport report = run(prepared.data, cfg.enable_validation ? &prepared.backend : nullptr, cfg, provider);
    auto records = report.records;
    for (auto& r : probe_false_positives(spec, seed, report.final_graph, prepared.data, records, cfg.intervention))
      records.push_back(std::move(r));
    cell.evaluation = evaluate_method(std::string(to_string(method)), report.final_graph, spec.ground_truth, records,
                                      cfg.cost);
    report.metrics = cell.evaluation;
    cell.report = std::move(report);
  } catch (const std::exception& e) {
    cell.error = e.what();
    cell.evaluation.method = std::string(to_string(method));
  }
  cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return cell;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

namespace {
std::string csv_field(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c == '\n' ? ' ' : c);
  return out + "\"";
}
}  // namespace

std::string benchmark_csv(const std::vector<CellResult>& cells) {
  std::ostringstream os;
  os << "scenario,seed,method,precision,recall,f1,shd,cost,risk,n_false_positive_edges,status\n";
  auto row = [&](const std::string& scenario, const std::string& seed, const MethodEvaluation& e,
                 const std::string& status) {
    os << scenario << ',' << seed << ',' << e.method << ',' << format_number(e.precision) << ','
       << format_number(e.recall) << ',' << format_number(e.f1) << ',' << format_number(e.shd) << ','
       << format_number(e.cost) << ',' << format_number(e.risk) << ',' << format_number(e.n_false_positive_edges)
       << ',' << csv_field(status) << '\n';
  };
  std::vector<std::string> scenario_order;
  std::map<std::pair<std::string, Method>, std::vector<const MethodEvaluation*>> groups;
  for (const auto& c : cells) {
    row(c.scenario, std::to_string(c.seed), c.evaluation, c.error.empty() ? "ok" : "error: " + c.error);
    if (std::find(scenario_order.begin(), scenario_order.end(), c.scenario) == scenario_order.end())
      scenario_order.push_back(c.scenario);
    if (c.error.empty()) groups[{c.scenario, c.method}].push_back(&c.evaluation);
  }
  for (const auto& s : scenario_order)
    for (Method m : kAllMethods) {
      auto it = groups.find({s, m});
      if (it == groups.end()) continue;
      auto pick = [&](auto f) {
        std::vector<double> v;
        for (const auto* e : it->second) v.push_back(f(*e));
        return median(std::move(v));
      };
      MethodEvaluation agg;
      agg.method = std::string(to_string(m));
      agg.precision = pick([](const MethodEvaluation& e) { return e.precision; });
      agg.recall = pick([](const MethodEvaluation& e) { return e.recall; });
      agg.f1 = pick([](const MethodEvaluation& e) { return e.f1; });
      agg.cost = pick([](const MethodEvaluation& e) { return e.cost; });
      agg.risk = pick([](const MethodEvaluation& e) { return e.risk; });
      const double shd_med = pick([](const MethodEvaluation& e) { return e.shd; });
      const double fp_med = pick([](const MethodEvaluation& e) { return e.n_false_positive_edges; });
      os << s << ",median," << agg.method << ',' << format_number(agg.precision) << ',' << format_number(agg.recall)
         << ',' << format_number(agg.f1) << ',' << format_number(shd_med) << ',' << format_number(agg.cost) << ','
         << format_number(agg.risk) << ',' << format_number(fp_med) << ",ok\n";
    }
  return os.str();
}

}  // namespace grid
