#include "grid/report.hpp"

#include "grid/errors.hpp"
#include "grid/graph_json.hpp"

#include <cstdio>
#include <set>

namespace grid {

namespace {

nlohmann::json generators_json(const std::vector<Generator>& gens) {
  nlohmann::json out = nlohmann::json::array();
  for (Generator g : gens) out.push_back(std::string(to_string(g)));
  return out;
}

nlohmann::json edge_json(const DirectedGraph& g, const Edge& e) { return {g.node(e.source).name, g.node(e.target).name}; }

nlohmann::json edges_json(const DirectedGraph& g, const std::vector<Edge>& edges) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : edges) out.push_back(edge_json(g, e));
  return out;
}

void reject_unknown(const nlohmann::json& doc, const std::set<std::string>& allowed, const std::string& where) {
  if (!doc.is_object()) throw SchemaViolation(where + " must be an object");
  for (const auto& [k, v] : doc.items())
    if (!allowed.count(k)) throw SchemaViolation("unknown config key '" + where + "." + k + "'");
}

template <typename T>
void take(const nlohmann::json& doc, const char* key, T& field) {
  if (!doc.contains(key)) return;
  try {
    field = doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw SchemaViolation(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace

nlohmann::json manifest_to_json(const RunManifest& m) {
  nlohmann::json j{{"scenario", m.scenario},
                   {"config_path", m.config_path},
                   {"seed", m.seed},
                   {"output_dir", m.output_dir},
                   {"generators", generators_json(m.generators)},
                   {"provider", std::string(to_string(m.provider))},
                   {"config_hash", m.config_hash}};
  if (m.timestamp) j["timestamp"] = *m.timestamp;
  return j;
}

nlohmann::json loop_config_to_json(const LoopConfig& cfg) {
  nlohmann::json pc{{"alpha", cfg.pc.alpha}, {"stable", cfg.pc.stable}, {"collider_priority", cfg.pc.collider_priority}};
  if (cfg.pc.max_cond_set) pc["max_cond_set"] = *cfg.pc.max_cond_set;
  const auto& n = cfg.nsem;
  const auto& iv = cfg.intervention;
  return {{"t_max", cfg.t_max},
          {"generators", generators_json(cfg.generators)},
          {"enable_ranking", cfg.enable_ranking},
          {"enable_llm_interventions", cfg.enable_llm_interventions},
          {"enable_validation", cfg.enable_validation},
          {"enable_dataset_update", cfg.enable_dataset_update},
          {"shd_termination", cfg.shd_termination},
          {"require_llm", cfg.require_llm},
          {"prune_mediated", cfg.prune_mediated},
          {"shared_interventions", cfg.shared_interventions},
          {"implied_refutation", cfg.implied_refutation},
          {"seed", cfg.seed},
          {"pc", pc},
          {"nsem",
           {{"lambda1", n.lambda1},
            {"lambda2", n.lambda2},
            {"gamma_initial", n.gamma_initial},
            {"gamma_growth", n.gamma_growth},
            {"gamma_every", n.gamma_every},
            {"lr_primary", n.lr_primary},
            {"lr_secondary", n.lr_secondary},
            {"epochs", n.epochs},
            {"batch_size", n.batch_size},
            {"restarts", n.restarts},
            {"standardize", n.standardize},
            {"nonlinear_head", n.nonlinear_head},
            {"head_units", n.head_units}}},
          {"intervention",
           {{"n_trials", iv.n_trials},
            {"t_baseline", iv.t_baseline},
            {"t_short", iv.t_short},
            {"t_long", iv.t_long},
            {"delta_gate", iv.delta_gate},
            {"epsilon", iv.epsilon},
            {"min_spacing_s", iv.min_spacing_s},
            {"stabilization_s", iv.stabilization_s},
            {"daily_cap", iv.daily_cap},
            {"majority_vote", iv.majority_vote},
            {"pseudo_sample_weight", iv.pseudo_sample_weight}}},
          {"llm",
           {{"model", cfg.prompt_settings.model},
            {"temperature", cfg.prompt_settings.temperature},
            {"top_p", cfg.prompt_settings.top_p},
            {"max_retries", cfg.prompt_settings.max_retries},
            {"base_backoff_ms", cfg.prompt_settings.base_backoff.count()}}},
          {"cost",
           {{"alpha", cfg.cost.alpha},
            {"beta", cfg.cost.beta},
            {"quality_delta_min", cfg.cost.quality_delta_min},
            {"high_conf_p", cfg.cost.high_conf_p},
            {"high_conf_value", cfg.cost.high_conf_value}}}};
}

void apply_config_json(LoopConfig& cfg, const nlohmann::json& doc) {
  reject_unknown(doc,
                 {"t_max", "generators", "enable_ranking", "enable_llm_interventions", "enable_validation",
                  "enable_dataset_update", "shd_termination", "require_llm", "prune_mediated", "shared_interventions", "implied_refutation", "seed", "pc", "nsem", "intervention", "llm",
                  "cost"},
                 "config");
  take(doc, "t_max", cfg.t_max);
  if (doc.contains("generators")) {
    if (!doc["generators"].is_array()) throw SchemaViolation("config key 'generators' must be an array");
    cfg.generators.clear();
    for (const auto& g : doc["generators"]) {
      if (!g.is_string()) throw SchemaViolation("generator names must be strings");
      cfg.generators.push_back(generator_from_string(g.get<std::string>()));
    }
  }
  take(doc, "enable_ranking", cfg.enable_ranking);
  take(doc, "enable_llm_interventions", cfg.enable_llm_interventions);
  take(doc, "enable_validation", cfg.enable_validation);
  take(doc, "enable_dataset_update", cfg.enable_dataset_update);
  take(doc, "shd_termination", cfg.shd_termination);
  take(doc, "require_llm", cfg.require_llm);
  take(doc, "prune_mediated", cfg.prune_mediated);
  take(doc, "shared_interventions", cfg.shared_interventions);
  take(doc, "implied_refutation", cfg.implied_refutation);
  take(doc, "seed", cfg.seed);
  if (doc.contains("pc")) {
    const auto& p = doc["pc"];
    reject_unknown(p, {"alpha", "max_cond_set", "stable", "collider_priority"}, "pc");
    take(p, "alpha", cfg.pc.alpha);
    if (p.contains("max_cond_set")) {
      int m = 0;
      take(p, "max_cond_set", m);
      cfg.pc.max_cond_set = m;
    }
    take(p, "stable", cfg.pc.stable);
    take(p, "collider_priority", cfg.pc.collider_priority);
  }
  if (doc.contains("nsem")) {
    const auto& p = doc["nsem"];
    auto& n = cfg.nsem;
    reject_unknown(p,
                   {"lambda1", "lambda2", "gamma_initial", "gamma_growth", "gamma_every", "lr_primary", "lr_secondary",
                    "epochs", "batch_size", "restarts", "standardize", "nonlinear_head", "head_units"},
                   "nsem");
    take(p, "lambda1", n.lambda1);
    take(p, "lambda2", n.lambda2);
    take(p, "gamma_initial", n.gamma_initial);
    take(p, "gamma_growth", n.gamma_growth);
    take(p, "gamma_every", n.gamma_every);
    take(p, "lr_primary", n.lr_primary);
    take(p, "lr_secondary", n.lr_secondary);
    take(p, "epochs", n.epochs);
    take(p, "batch_size", n.batch_size);
    take(p, "restarts", n.restarts);
    take(p, "standardize", n.standardize);
    take(p, "nonlinear_head", n.nonlinear_head);
    take(p, "head_units", n.head_units);
  }
  if (doc.contains("intervention")) {
    const auto& p = doc["intervention"];
    auto& iv = cfg.intervention;
    reject_unknown(p,
                   {"n_trials", "t_baseline", "t_short", "t_long", "delta_gate", "epsilon", "min_spacing_s",
                    "stabilization_s", "daily_cap", "majority_vote", "pseudo_sample_weight"},
                   "intervention");
    take(p, "n_trials", iv.n_trials);
    take(p, "t_baseline", iv.t_baseline);
    take(p, "t_short", iv.t_short);
    take(p, "t_long", iv.t_long);
    take(p, "delta_gate", iv.delta_gate);
    take(p, "epsilon", iv.epsilon);
    take(p, "min_spacing_s", iv.min_spacing_s);
    take(p, "stabilization_s", iv.stabilization_s);
    take(p, "daily_cap", iv.daily_cap);
    take(p, "majority_vote", iv.majority_vote);
    take(p, "pseudo_sample_weight", iv.pseudo_sample_weight);
  }
  if (doc.contains("llm")) {
    const auto& p = doc["llm"];
    auto& s = cfg.prompt_settings;
    reject_unknown(p, {"model", "temperature", "top_p", "max_retries", "base_backoff_ms"}, "llm");
    take(p, "model", s.model);
    take(p, "temperature", s.temperature);
    take(p, "top_p", s.top_p);
    take(p, "max_retries", s.max_retries);
    if (p.contains("base_backoff_ms")) {
      long long ms = 0;
      take(p, "base_backoff_ms", ms);
      s.base_backoff = std::chrono::milliseconds(ms);
    }
  }
  if (doc.contains("cost")) {
    const auto& p = doc["cost"];
    reject_unknown(p, {"alpha", "beta", "quality_delta_min", "high_conf_p", "high_conf_value"}, "cost");
    take(p, "alpha", cfg.cost.alpha);
    take(p, "beta", cfg.cost.beta);
    take(p, "quality_delta_min", cfg.cost.quality_delta_min);
    take(p, "high_conf_p", cfg.cost.high_conf_p);
    take(p, "high_conf_value", cfg.cost.high_conf_value);
  }
}

std::string config_hash(const nlohmann::json& doc) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : doc.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json evaluation_to_json(const MethodEvaluation& m) {
  return {{"method", m.method},
          {"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"shd", m.shd},
          {"cost", m.cost},
          {"risk", m.risk},
          {"risk_definition", "mean quality-filtered satisfaction loss over false-positive edges"},
          {"n_false_positive_edges", m.n_false_positive_edges},
          {"true_positives", m.confusion.tp},
          {"false_positives", m.confusion.fp},
          {"false_negatives", m.confusion.fn}};
}

nlohmann::json union_to_json(const UnionGraph& u) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : u.scored_edges) {
    nlohmann::json sup = nlohmann::json::array();
    for (Generator g : kAllGenerators)
      if (s.supported_by(g)) sup.push_back(std::string(to_string(g)));
    out.push_back({{"edge", edge_json(u.nodes, s.edge)},
                   {"confidence", s.confidence},
                   {"supporters", std::move(sup)},
                   {"status", std::string(to_string(s.status))}});
  }
  return out;
}

nlohmann::json report_to_json(const RunReport& report, const RunManifest& manifest) {
  nlohmann::json final_graph = graph_to_json(report.final_graph);
  nlohmann::json untested = nlohmann::json::array();
  for (const auto& e : report.untested_edges) untested.push_back(edge_json(report.final_graph, e));
  final_graph["untested"] = std::move(untested);
  final_graph["mediated"] =
      report.trace.empty() ? nlohmann::json::array() : edges_json(report.final_graph, report.trace.back().mediated);

  nlohmann::json trace = nlohmann::json::array();
  for (const auto& t : report.trace) {
    nlohmann::json cands = nlohmann::json::object();
    for (const auto& [g, graph] : t.candidates) cands[std::string(to_string(g))] = graph_to_json(graph)["edges"];
    nlohmann::json row{{"iteration", t.iteration},
                       {"dataset_rows", t.dataset_rows},
                       {"candidates", std::move(cands)},
                       {"union", union_to_json(t.union_graph)},
                       {"current_graph", graph_to_json(t.current_graph)["edges"]},
                       {"mediated", edges_json(t.current_graph, t.mediated)},
                       {"implied_refuted", edges_json(t.current_graph, t.implied_refuted)},
                       {"shd_vs_truth", t.shd_vs_truth ? nlohmann::json(*t.shd_vs_truth) : nlohmann::json()}};
    if (t.tested_edge) {
      row["tested_edge"] = edge_json(t.current_graph, *t.tested_edge);
      const auto& rec = report.records.at(*t.record_index);
      row["record"] = {{"target_value", rec.plan.target_value},
                       {"origin", rec.plan.origin},
                       {"verdict", std::string(to_string(rec.verdict))},
                       {"representative_delta", rec.representative_delta()}};
      nlohmann::json shared = nlohmann::json::array();
      for (auto idx : t.shared_record_indices) {
        const auto& sr = report.records.at(idx);
        shared.push_back({{"edge", edge_json(t.current_graph, sr.plan.edge)},
                          {"verdict", std::string(to_string(sr.verdict))},
                          {"representative_delta", sr.representative_delta()}});
      }
      row["shared"] = std::move(shared);
    } else {
      row["tested_edge"] = nullptr;
    }
    trace.push_back(std::move(row));
  }

  nlohmann::json warnings = report.warnings;
  return {{"manifest", manifest_to_json(manifest)},
          {"final_graph", std::move(final_graph)},
          {"termination", std::string(to_string(report.termination))},
          {"iterations", report.trace.size()},
          {"interventions", report.records.size()},
          {"generators_used", generators_json(report.generators_used)},
          {"warnings", std::move(warnings)},
          {"metrics", report.metrics ? evaluation_to_json(*report.metrics) : nlohmann::json()},
          {"trace", std::move(trace)}};
}

}  // namespace grid
