#include "grid/pipeline.hpp"

#include "grid/errors.hpp"
#include "grid/simulator.hpp"

#include <algorithm>
#include <map>
#include <random>

namespace grid {

void LoopConfig::validate() const {
  if (t_max < 1) throw InvalidArgument("t_max must be >= 1");
  if (generators.empty()) throw InvalidArgument("at least one generator is required");
  constraints.validate();
  pc.validate();
  nsem.validate();
  intervention.validate();
  cost.validate();
}

bool LoopConfig::uses(Generator g) const { return std::find(generators.begin(), generators.end(), g) != generators.end(); }

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::AllValidated: return "all_validated";
    case Termination::MaxIterations: return "max_iterations";
    case Termination::ZeroShd: return "zero_shd";
    case Termination::ObservationOnly: return "observation_only";
  }
  return "max_iterations";
}

namespace {

// Strict majority of the generators that actually ran.
int observation_support(int n_generators) { return n_generators / 2 + 1; }

DirectedGraph assemble(const UnionGraph& u, const StructuralConstraints& constraints, int min_support,
                       bool observation_only, const std::vector<Edge>& mediated = {}) {
  if (u.nodes.size() == 0) return u.nodes;
  AdjacencyMatrix a = AdjacencyMatrix::Zero(u.nodes.size(), u.nodes.size());
  std::map<Edge, double> confidence;
  for (const auto& s : u.scored_edges) {
    if (std::find(mediated.begin(), mediated.end(), s.edge) != mediated.end()) continue;
    const bool keep = s.status == EdgeStatus::Validated ||
                      (s.status == EdgeStatus::Untested &&
                       (observation_only ? s.support_count() >= min_support : s.support_count() == 3));
    if (!keep) continue;
    a(s.edge.source, s.edge.target) = 1;
    confidence[s.edge] = s.confidence;
  }
  AdjacencyMatrix kept = apply_constraints(u.nodes.with_adjacency(std::move(a)), constraints).adjacency();
  for (auto cycle = find_cycle(kept); !cycle.empty(); cycle = find_cycle(kept)) {
    auto conf = [&](const Edge& e) {
      auto it = confidence.find(e);
      return it == confidence.end() ? 1.0 : it->second;
    };
    // Lowest confidence goes; among equals the larger (source, target) pair.
    Edge drop = cycle.front();
    for (const auto& e : cycle)
      if (conf(e) < conf(drop) || (conf(e) == conf(drop) && drop < e)) drop = e;
    kept(drop.source, drop.target) = 0;
  }
  return u.nodes.with_adjacency(std::move(kept));
}

}  // namespace

std::vector<Edge> mediated_edges(const UnionGraph& u, const Skeleton& skeleton) {
  const int n = u.nodes.size();
  AdjacencyMatrix v = AdjacencyMatrix::Zero(n, n);
  for (const auto& s : u.scored_edges)
    if (s.status == EdgeStatus::Validated || (s.status == EdgeStatus::Untested && s.support_count() == 3))
      v(s.edge.source, s.edge.target) = 1;
  std::vector<Edge> out;
  for (const auto& s : u.scored_edges) {
    if (s.status != EdgeStatus::Validated) continue;
    const auto [x, y] = s.edge;
    if (skeleton.adjacent(x, y)) continue;
    const auto* sep = skeleton.sepset(x, y);
    if (!sep || sep->empty()) continue;
    AdjacencyMatrix rest = v;
    rest(x, y) = 0;
    const bool blocked = std::any_of(sep->begin(), sep->end(), [&](int m) {
      return m != x && m != y && reachable(rest, x, m) && reachable(rest, m, y);
    });
    if (blocked) out.push_back(s.edge);
  }
  return out;
}

DirectedGraph final_graph(const UnionGraph& u, const StructuralConstraints& constraints, bool observation_only,
                          const Skeleton* skeleton) {
  return assemble(u, constraints, 2, observation_only, skeleton ? mediated_edges(u, *skeleton) : std::vector<Edge>{});
}

DirectedGraph final_graph(const std::vector<IterationTrace>& trace, const StructuralConstraints& constraints,
                          bool observation_only) {
  if (trace.empty()) return DirectedGraph{};
  return final_graph(trace.back().union_graph, constraints, observation_only);
}

namespace {

struct Generators {
  const LoopConfig& cfg;
  std::vector<Generator> active;
  std::optional<DirectedGraph> llm_graph;

  Candidates propose(const Dataset& data, std::optional<Skeleton>& skeleton) const {
    Candidates out;
    skeleton.reset();
    for (Generator g : active) {
      switch (g) {
        case Generator::PC: {
          auto pc = run_pc(data, cfg.pc, cfg.constraints);
          out.emplace_back(g, std::move(pc.graph));
          skeleton = std::move(pc.skeleton);
          break;
        }
        case Generator::NSEM: out.emplace_back(g, run_nsem(data, cfg.nsem, cfg.constraints).threshold.graph); break;
        case Generator::LLM: out.emplace_back(g, *llm_graph); break;
      }
    }
    return out;
  }
};

// Applies the verdict on the tested edge to a copy of the union.
UnionGraph with_verdict(UnionGraph u, const Edge& e, EdgeStatus verdict) {
  auto it = std::find_if(u.scored_edges.begin(), u.scored_edges.end(), [&](const ScoredEdge& s) { return s.edge == e; });
  if (it == u.scored_edges.end()) return u;
  if (verdict == EdgeStatus::Refuted) {
    u.scored_edges.erase(it);
  } else {
    it->status = verdict;
    if (verdict == EdgeStatus::Validated) it->confidence = 1.0;
  }
  return u;
}

}  // namespace

namespace {

PromptSpec elicitation_prompt(const std::vector<Variable>& vars, const LoopConfig& cfg) {
  PromptSpec prompt = build_prompt(vars, cfg.constraints, cfg.environment);
  prompt.model = cfg.prompt_settings.model;
  prompt.temperature = cfg.prompt_settings.temperature;
  prompt.top_p = cfg.prompt_settings.top_p;
  prompt.max_retries = cfg.prompt_settings.max_retries;
  prompt.base_backoff = cfg.prompt_settings.base_backoff;
  return prompt;
}

}  // namespace

RunReport run(const Dataset& data_obs, ExecutionBackend* backend, const LoopConfig& cfg,
              const PriorProvider* provider) {
  cfg.validate();
  if (data_obs.rows() == 0) throw InvalidArgument("observational data is empty");
  if (cfg.enable_validation && !backend) throw InvalidArgument("interventions need an execution backend");
  if (backend && backend->variables() != data_obs.variables)
    throw NodeMismatch("backend variables differ from the data's variables");
  if (cfg.ground_truth && cfg.ground_truth->nodes() != data_obs.variables)
    throw NodeMismatch("ground truth is defined over different variables");

  RunReport report;
  const auto& vars = data_obs.variables;

  LoopConfig local = cfg;
  local.nsem.seed = derive_seed(cfg.seed, 17);
  Generators gen{local, {}, std::nullopt};
  for (Generator g : cfg.generators) {
    if (std::find(gen.active.begin(), gen.active.end(), g) != gen.active.end()) continue;
    if (g == Generator::LLM) {
      try {
        if (!provider) throw PriorUnavailable("no prior provider configured");
        gen.llm_graph = query_prior(*provider, elicitation_prompt(vars, cfg), vars, cfg.constraints);
      } catch (const PriorUnavailable& e) {
        if (cfg.require_llm || cfg.generators.size() == 1) throw;
        report.warnings.push_back(std::string("LLM generator dropped: ") + e.what());
        continue;
      }
    }
    gen.active.push_back(g);
  }
  report.generators_used = gen.active;

  Dataset data = data_obs;
  EdgeHistory history;
  std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, 23));
  Scheduler scheduler(cfg.intervention.min_spacing_s, cfg.intervention.stabilization_s, cfg.intervention.daily_cap);
  std::uint64_t episode = 0;
  const auto outcomes = OutcomeVariables::from_names(vars, cfg.satisfaction_variable, cfg.energy_variable);
  const PromptSpec base_prompt = elicitation_prompt(vars, cfg);
  const PriorProvider* design_provider = cfg.enable_llm_interventions ? provider : nullptr;

  auto shd_of = [&](const DirectedGraph& g) -> std::optional<int> {
    if (!cfg.ground_truth) return std::nullopt;
    return shd(*cfg.ground_truth, g);
  };

  Candidates candidates;
  std::optional<Skeleton> skeleton;
  bool stale = true;
  const bool observation_only = !cfg.enable_validation;
  const int min_support = observation_support(static_cast<int>(gen.active.size()));

  for (int it = 1; it <= cfg.t_max; ++it) {
    if (stale) {
      candidates = gen.propose(data, skeleton);
      stale = false;
    }
    IterationTrace tr;
    tr.iteration = it;
    tr.candidates = candidates;
    tr.union_graph = merge(candidates, history);
    tr.dataset_rows = data.rows();

    if (observation_only) {
      tr.current_graph = assemble(tr.union_graph, cfg.constraints, min_support, true);
      tr.shd_vs_truth = shd_of(tr.current_graph);
      report.trace.push_back(std::move(tr));
      report.termination = Termination::ObservationOnly;
      break;
    }

    auto queue = rank_for_testing(tr.union_graph);
    queue.erase(std::remove_if(queue.begin(), queue.end(),
                               [&](const ScoredEdge& s) { return !vars[static_cast<std::size_t>(s.edge.source)].intervenable(); }),
                queue.end());
    if (cfg.implied_refutation) {
      AdjacencyMatrix validated = AdjacencyMatrix::Zero(data.cols(), data.cols());
      for (const auto& [ed, st] : history)
        if (st == EdgeStatus::Validated) validated(ed.source, ed.target) = 1;
      std::vector<ScoredEdge> kept;
      for (const auto& s : queue) {
        if (reachable(validated, s.edge.target, s.edge.source)) {
          history[s.edge] = EdgeStatus::Refuted;
          tr.implied_refuted.push_back(s.edge);
        } else {
          kept.push_back(s);
        }
      }
      queue = std::move(kept);
      for (const auto& ed : tr.implied_refuted) tr.union_graph = with_verdict(tr.union_graph, ed, EdgeStatus::Refuted);
    }
    if (!cfg.enable_ranking) std::shuffle(queue.begin(), queue.end(), shuffle_rng);

    const Skeleton* sk = cfg.prune_mediated && skeleton ? &*skeleton : nullptr;
    if (queue.empty()) {
      if (sk) tr.mediated = mediated_edges(tr.union_graph, *sk);
      tr.current_graph = final_graph(tr.union_graph, cfg.constraints, false, sk);
      tr.shd_vs_truth = shd_of(tr.current_graph);
      report.trace.push_back(std::move(tr));
      report.termination = Termination::AllValidated;
      break;
    }

    const Edge e = queue.front().edge;
    std::vector<int> extra;
    if (cfg.shared_interventions)
      for (std::size_t q = 1; q < queue.size(); ++q)
        if (queue[q].edge.source == e.source) extra.push_back(queue[q].edge.target);
    const auto plan = design_intervention(e, vars, data.observational_mean(e.source), cfg.intervention,
                                          design_provider, &base_prompt);
    auto recs = execute_multi(plan, extra, *backend, scheduler, episode, outcomes);
    if (cfg.enable_dataset_update) {
      data.append(to_pseudo_samples(recs.front()));
      stale = true;
    }
    tr.tested_edge = e;
    UnionGraph updated = tr.union_graph;
    for (std::size_t r = 0; r < recs.size(); ++r) {
      history[recs[r].plan.edge] = recs[r].verdict;
      updated = with_verdict(std::move(updated), recs[r].plan.edge, recs[r].verdict);
      if (r == 0) tr.record_index = report.records.size();
      else tr.shared_record_indices.push_back(report.records.size());
      report.records.push_back(std::move(recs[r]));
    }
    if (sk) tr.mediated = mediated_edges(updated, *sk);
    tr.current_graph = final_graph(updated, cfg.constraints, false, sk);
    tr.shd_vs_truth = shd_of(tr.current_graph);
    const bool solved = cfg.shd_termination && tr.shd_vs_truth && *tr.shd_vs_truth == 0;
    report.trace.push_back(std::move(tr));
    if (solved) {
      report.termination = Termination::ZeroShd;
      break;
    }
    report.termination = Termination::MaxIterations;
  }

  report.final_graph = report.trace.back().current_graph;
  for (const auto& ed : report.final_graph.edges()) {
    const auto h = history.find(ed);
    if (h == history.end() || h->second != EdgeStatus::Validated) report.untested_edges.push_back(ed);
  }
  if (cfg.ground_truth)
    report.metrics = evaluate_method("GRID", report.final_graph, *cfg.ground_truth, report.records, cfg.cost);
  return report;
}

}  // namespace grid
