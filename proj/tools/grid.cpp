#include "grid/benchmark.hpp"
#include "grid/errors.hpp"
#include "grid/graph_json.hpp"
#include "grid/report.hpp"
#include "grid/simulator.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <future>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using namespace grid;

namespace {

// Bad arguments that only show up after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  try {
    for (const auto& part : split(text, ',')) {
      if (auto dots = part.find(".."); dots != std::string::npos) {
        const auto lo = std::stoull(part.substr(0, dots));
        const auto hi = std::stoull(part.substr(dots + 2));
        if (hi < lo) throw UsageError("empty seed range '" + part + "'");
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
      } else {
        out.push_back(std::stoull(part));
      }
    }
  } catch (const std::logic_error&) {
    throw UsageError("cannot parse seeds '" + text + "'");
  }
  if (out.empty()) throw UsageError("no seeds given");
  return out;
}

ScenarioSpec load_scenario(const std::string& name, const std::string& file) {
  try {
    if (!file.empty()) return scenario_from_json(nlohmann::json::parse(read_text_file(file)));
    return builtin_scenario(name);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("scenario file '" + file + "': " + e.what());
  }
}

std::unique_ptr<PriorProvider> make_provider(const std::string& kind) {
  if (kind == "mock") return std::make_unique<MockProvider>();
  if (kind == "remote") return std::make_unique<RemoteProvider>(RemoteSettings::from_environment());
  throw UsageError("unknown provider '" + kind + "' (expected mock or remote)");
}

std::vector<Generator> parse_generators(const std::string& text) {
  std::vector<Generator> out;
  try {
    for (const auto& g : split(text, ',')) out.push_back(generator_from_string(g));
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  if (out.empty()) throw UsageError("no generators given");
  return out;
}

std::vector<Variable> variables_for_csv(const CsvTable& table) {
  std::vector<Variable> vars;
  for (int j = 0; j < static_cast<int>(table.columns.size()); ++j) {
    Variable v;
    v.name = table.columns[static_cast<std::size_t>(j)];
    v.kind = VariableKind::Mediator;
    v.bounds = {table.values.col(j).minCoeff(), table.values.col(j).maxCoeff()};
    vars.push_back(v);
  }
  return vars;
}

Dataset dataset_from_csv(const std::string& path, const std::vector<Variable>* known) {
  const CsvTable table = parse_samples_csv(read_text_file(path));
  std::vector<Variable> vars;
  if (known) {
    for (const auto& c : table.columns) {
      auto it = std::find_if(known->begin(), known->end(), [&](const Variable& v) { return v.name == c; });
      if (it == known->end()) throw SchemaViolation("CSV column '" + c + "' is not a scenario variable");
      vars.push_back(*it);
    }
  } else {
    vars = variables_for_csv(table);
  }
  Dataset d(vars);
  d.values = table.values;
  d.weights = table.weights;
  d.regimes = table.regimes;
  return d;
}

void write_outputs(const fs::path& dir, const RunReport& report, const RunManifest& manifest) {
  fs::create_directories(dir);
  nlohmann::json graph = graph_to_json(report.final_graph);
  graph["manifest"] = manifest_to_json(manifest);
  write_text_file_atomic((dir / "graph.json").string(), graph.dump(2) + "\n");
  write_text_file_atomic((dir / "report.json").string(), report_to_json(report, manifest).dump(2) + "\n");
  write_text_file_atomic((dir / "interventions.jsonl").string(), records_to_jsonl(report.records));
  std::vector<EvaluationRow> rows;
  if (report.metrics) rows.push_back({manifest.scenario, std::to_string(manifest.seed), *report.metrics});
  write_text_file_atomic((dir / "metrics.csv").string(), evaluations_to_csv(rows));
}

LoopConfig read_config(const std::string& path) {
  LoopConfig cfg;
  if (path.empty()) return cfg;
  try {
    apply_config_json(cfg, nlohmann::json::parse(read_text_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config '" + path + "': " + e.what());
  } catch (const SchemaViolation& e) {
    throw UsageError("config '" + path + "': " + e.what());
  } catch (const InvalidArgument& e) {
    throw UsageError("config '" + path + "': " + e.what());
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterative causal discovery with generator consensus and interventions"};
  app.require_subcommand(1);

  // simulate
  std::string sim_scenario = "base", sim_scenario_file, sim_out;
  int sim_n = 0;
  std::uint64_t sim_seed = 0;
  auto* simulate = app.add_subcommand("simulate", "Write observational samples of a scenario as CSV");
  simulate->add_option("--scenario", sim_scenario, "base, noisy, hidden or largesim");
  simulate->add_option("--scenario-file", sim_scenario_file, "Scenario JSON file");
  simulate->add_option("--n", sim_n, "Number of samples (default: scenario default)")->check(CLI::NonNegativeNumber);
  simulate->add_option("--seed", sim_seed, "Random seed");
  simulate->add_option("--out", sim_out, "Output CSV path")->required();

  // scenario
  std::string sc_name = "base", sc_out;
  auto* scenario = app.add_subcommand("scenario", "Print or write a built-in scenario definition as JSON");
  scenario->add_option("--name", sc_name, "base, noisy, hidden or largesim");
  scenario->add_option("--out", sc_out, "Output path (default: stdout)");

  // discover
  std::string d_scenario, d_scenario_file, d_data, d_gt, d_generators, d_provider = "mock", d_out = "out", d_config,
                          d_timestamp;
  int d_n = 0;
  std::optional<int> d_tmax;
  std::uint64_t d_seed = 0;
  bool d_shd_term = false, d_no_shd_term = false, d_require_llm = false, d_print_config = false;
  auto* discover = app.add_subcommand("discover", "Run the discovery loop and write graph, report and metrics");
  discover->add_option("--scenario", d_scenario, "Built-in scenario; enables interventions on its simulator");
  discover->add_option("--scenario-file", d_scenario_file, "Scenario JSON file");
  discover->add_option("--data", d_data, "Observational CSV (observation-only unless a scenario is given)");
  discover->add_option("--ground-truth", d_gt, "Ground-truth graph JSON");
  discover->add_option("--generators", d_generators, "Comma list of pc,nsem,llm");
  discover->add_option("--provider", d_provider, "mock or remote");
  discover->add_option("--t-max", d_tmax, "Iteration limit")->check(CLI::PositiveNumber);
  discover->add_option("--n", d_n, "Observational samples to simulate")->check(CLI::NonNegativeNumber);
  discover->add_option("--seed", d_seed, "Random seed");
  discover->add_option("--out", d_out, "Output directory");
  discover->add_option("--config", d_config, "Loop config JSON");
  discover->add_option("--timestamp", d_timestamp, "Timestamp recorded in the manifest");
  discover->add_flag("--shd-termination", d_shd_term, "Stop once the graph matches the ground truth (needs one)");
  discover->add_flag("--no-shd-termination", d_no_shd_term, "Never stop on a zero SHD");
  discover->add_flag("--require-llm", d_require_llm, "Fail when the LLM prior is unavailable");
  discover->add_flag("--print-config", d_print_config, "Print the effective loop config as JSON and exit");

  // benchmark
  std::string b_scenarios = "base,noisy,hidden", b_seeds = "1..5", b_out = "bench", b_methods, b_provider = "mock",
              b_config;
  int b_jobs = 0, b_n = 0;
  auto* benchmark = app.add_subcommand("benchmark", "Run scenarios x seeds x methods and summarise");
  benchmark->add_option("--scenarios", b_scenarios, "Comma list of scenarios");
  benchmark->add_option("--seeds", b_seeds, "Seeds, e.g. 1..5 or 1,2,3");
  benchmark->add_option("--methods", b_methods, "Comma list (default: all)");
  benchmark->add_option("--provider", b_provider, "mock or remote");
  benchmark->add_option("--config", b_config, "Loop config JSON");
  benchmark->add_option("--n", b_n, "Observational samples per run")->check(CLI::NonNegativeNumber);
  benchmark->add_option("--jobs", b_jobs, "Parallel cells (default: hardware threads)")->check(CLI::NonNegativeNumber);
  benchmark->add_option("--out", b_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*simulate) {
      const auto spec = load_scenario(sim_scenario, sim_scenario_file);
      const int n = sim_n > 0 ? sim_n : spec.default_samples;
      write_text_file_atomic(sim_out, samples_to_csv(spec.variables, generate_observational(spec, n, sim_seed)));
      return 0;
    }

    if (*scenario) {
      const auto text = scenario_to_json(load_scenario(sc_name, "")).dump(2) + "\n";
      if (sc_out.empty()) std::cout << text;
      else write_text_file_atomic(sc_out, text);
      return 0;
    }

    if (*discover) {
      if (d_shd_term && d_no_shd_term) throw UsageError("--shd-termination and --no-shd-termination conflict");
      LoopConfig cfg = read_config(d_config);
      if (d_tmax) cfg.t_max = *d_tmax;
      if (!d_generators.empty()) cfg.generators = parse_generators(d_generators);
      if (d_require_llm) cfg.require_llm = true;
      if (d_no_shd_term) cfg.shd_termination = false;
      cfg.seed = d_seed;

      const bool has_scenario = !d_scenario.empty() || !d_scenario_file.empty();
      if (!has_scenario && d_data.empty()) throw UsageError("discover needs --scenario, --scenario-file or --data");
      std::optional<ScenarioSpec> spec;
      if (has_scenario) spec = load_scenario(d_scenario, d_scenario_file);

      if (spec) cfg = scenario_loop_config(*spec, d_seed, cfg);
      else cfg.constraints.forbid_output_sources = false;
      if (!spec && d_gt.empty()) cfg.ground_truth.reset();
      if (d_shd_term && d_gt.empty() && !spec) throw UsageError("--shd-termination needs a ground truth");

      auto provider = make_provider(d_provider);
      RunManifest manifest;
      manifest.scenario = spec ? std::string(to_string(spec->name)) : fs::path(d_data).stem().string();
      manifest.config_path = d_config;
      manifest.seed = d_seed;
      manifest.output_dir = d_out;
      manifest.provider = provider->kind();
      if (!d_timestamp.empty()) manifest.timestamp = d_timestamp;

      Dataset data;
      std::optional<ScenarioRun> prepared;
      if (!d_data.empty()) {
        data = dataset_from_csv(d_data, spec ? &spec->variables : nullptr);
        if (spec && data.variables != spec->variables) throw UsageError("CSV columns must match the scenario variables");
      }
      if (spec) {
        prepared.emplace(prepare_scenario_run(*spec, d_seed, d_n));
        if (d_data.empty()) data = prepared->data;
      } else {
        cfg.enable_validation = false;
      }
      if (!d_gt.empty()) {
        try {
          cfg.ground_truth = graph_from_json(nlohmann::json::parse(read_text_file(d_gt)), data.variables);
        } catch (const nlohmann::json::exception& e) {
          throw UsageError("ground truth '" + d_gt + "': " + e.what());
        }
      }
      manifest.generators = cfg.generators;
      manifest.config_hash = config_hash(loop_config_to_json(cfg));
      if (d_print_config) {
        std::cout << loop_config_to_json(cfg).dump(2) << "\n";
        return 0;
      }

      RunReport report = run(data, prepared && cfg.enable_validation ? &prepared->backend : nullptr, cfg,
                             provider.get());
      if (spec && cfg.ground_truth) {
        auto records = report.records;
        for (auto& r : probe_false_positives(*spec, d_seed, report.final_graph, data, records, cfg.intervention))
          records.push_back(std::move(r));
        report.metrics = evaluate_method("GRID", report.final_graph, *cfg.ground_truth, records, cfg.cost);
      }
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
      write_outputs(d_out, report, manifest);
      std::cout << "termination: " << to_string(report.termination) << ", iterations: " << report.trace.size()
                << ", edges: " << report.final_graph.edge_count();
      if (report.metrics) std::cout << ", shd: " << report.metrics->shd << ", f1: " << format_number(report.metrics->f1);
      std::cout << "\n";
      return 0;
    }

    if (*benchmark) {
      LoopConfig base = read_config(b_config);
      std::vector<ScenarioSpec> specs;
      for (const auto& s : split(b_scenarios, ',')) specs.push_back(load_scenario(s, ""));
      const auto seeds = parse_seeds(b_seeds);
      std::vector<Method> methods;
      try {
        if (b_methods.empty()) methods.assign(kAllMethods.begin(), kAllMethods.end());
        else
          for (const auto& m : split(b_methods, ',')) methods.push_back(method_from_string(m));
      } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
      }
      auto provider = make_provider(b_provider);

      struct Job {
        const ScenarioSpec* spec;
        std::uint64_t seed;
        Method method;
      };
      std::vector<Job> jobs;
      for (const auto& spec : specs)
        for (auto seed : seeds)
          for (Method m : methods) jobs.push_back({&spec, seed, m});

      std::vector<CellResult> cells(jobs.size());
      const unsigned workers =
          b_jobs > 0 ? static_cast<unsigned>(b_jobs) : std::max(1u, std::thread::hardware_concurrency());
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++)
          cells[i] = run_cell(*jobs[i].spec, jobs[i].seed, jobs[i].method, provider.get(), base, b_n);
      };
      std::vector<std::future<void>> pool;
      for (unsigned w = 0; w < std::min<std::size_t>(workers, jobs.size()); ++w)
        pool.push_back(std::async(std::launch::async, worker));
      for (auto& f : pool) f.get();

      const fs::path out(b_out);
      fs::create_directories(out / "runs");
      int failures = 0;
      for (const auto& c : cells) {
        if (!c.error.empty()) {
          ++failures;
          std::cerr << "cell " << c.scenario << "/" << c.seed << "/" << to_string(c.method) << " failed: " << c.error
                    << "\n";
          continue;
        }
        const auto& e = c.evaluation;
        if (e.n_false_positive_edges == 0 && (e.cost != 0.0 || e.risk != 0.0))
          throw Error("nonzero cost or risk without false positives in " + c.scenario);
        RunManifest manifest;
        manifest.scenario = c.scenario;
        manifest.seed = c.seed;
        manifest.output_dir = b_out;
        manifest.config_path = b_config;
        manifest.generators = c.report->generators_used;
        manifest.provider = provider->kind();
        manifest.config_hash = config_hash(loop_config_to_json(base));
        const auto name = c.scenario + "_" + std::to_string(c.seed) + "_" + std::string(to_string(c.method)) + ".json";
        write_text_file_atomic((out / "runs" / name).string(), report_to_json(*c.report, manifest).dump(2) + "\n");
      }
      write_text_file_atomic((out / "summary.csv").string(), benchmark_csv(cells));
      std::cout << cells.size() << " cells, " << failures << " failed\n";
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
