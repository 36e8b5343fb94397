#include "grid/metrics.hpp"

#include "grid/errors.hpp"

#include <unsupported/Eigen/SpecialFunctions>

#include <cmath>
#include <numeric>
#include <sstream>

namespace grid {

void CostConfig::validate() const {
  if (alpha < 0.0 || beta < 0.0) throw InvalidArgument("cost weights must be >= 0");
  if (!(high_conf_p > 0.0 && high_conf_p < 1.0)) throw InvalidArgument("high_conf_p must lie in (0, 1)");
}

bool passes_quality(const InterventionRecord& record, const CostConfig& cfg) {
  return std::abs(record.representative_delta()) > cfg.quality_delta_min;
}

double edge_cost(const std::vector<InterventionRecord>& records, const CostConfig& cfg) {
  double total = 0.0;
  int kept = 0;
  for (const auto& r : records) {
    if (!passes_quality(r, cfg)) continue;
    total += cfg.alpha * r.satisfaction_loss + cfg.beta * r.energy_increase;
    ++kept;
  }
  return kept ? total / kept : 0.0;
}

namespace {
std::map<Edge, std::vector<InterventionRecord>> by_edge(const std::vector<InterventionRecord>& records) {
  std::map<Edge, std::vector<InterventionRecord>> out;
  for (const auto& r : records) out[r.plan.edge].push_back(r);
  return out;
}
}  // namespace

std::map<Edge, double> edge_costs(const std::vector<InterventionRecord>& records, const CostConfig& cfg) {
  std::map<Edge, double> out;
  for (const auto& [e, recs] : by_edge(records)) out[e] = edge_cost(recs, cfg);
  return out;
}

double method_cost(const DirectedGraph& g_hat, const DirectedGraph& g_true, const std::map<Edge, double>& costs) {
  const auto fp = false_positive_edges(g_true, g_hat);
  if (fp.empty()) return 0.0;
  double total = 0.0;
  for (const auto& e : fp)
    if (auto it = costs.find(e); it != costs.end()) total += it->second;
  return total / static_cast<double>(fp.size());
}

double method_risk(const DirectedGraph& g_hat, const DirectedGraph& g_true,
                   const std::vector<InterventionRecord>& records, const CostConfig& cfg) {
  const auto fp = false_positive_edges(g_true, g_hat);
  if (fp.empty()) return 0.0;
  const auto grouped = by_edge(records);
  double total = 0.0;
  for (const auto& e : fp) {
    auto it = grouped.find(e);
    if (it == grouped.end()) continue;
    double s = 0.0;
    int kept = 0;
    for (const auto& r : it->second)
      if (passes_quality(r, cfg)) {
        s += r.satisfaction_loss;
        ++kept;
      }
    if (kept) total += s / kept;
  }
  return total / static_cast<double>(fp.size());
}

WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw InsufficientSamples("Welch t-test needs at least 2 samples per phase");
  auto moments = [](const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::pair{m, ss / (n - 1.0)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double sa = va / na, sb = vb / nb;
  WelchResult r;
  if (sa + sb <= 0.0) {
    r.p_value = ma == mb ? 1.0 : 0.0;
    r.t = ma == mb ? 0.0 : std::copysign(HUGE_VAL, mb - ma);
    r.df = na + nb - 2.0;
    return r;
  }
  r.t = (mb - ma) / std::sqrt(sa + sb);
  r.df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  r.p_value = Eigen::numext::betainc(0.5 * r.df, 0.5, r.df / (r.df + r.t * r.t));
  r.p_value = std::clamp(r.p_value, 0.0, 1.0);
  return r;
}

double effect_confidence(const std::vector<double>& pre, const std::vector<double>& post, const CostConfig& cfg) {
  const double p = welch_t_test(pre, post).p_value;
  return p < cfg.high_conf_p ? cfg.high_conf_value : cfg.low_conf_value;
}

MethodEvaluation evaluate_method(const std::string& method, const DirectedGraph& g_hat, const DirectedGraph& g_true,
                                 const std::vector<InterventionRecord>& records, const CostConfig& cfg) {
  MethodEvaluation m;
  m.method = method;
  m.confusion = edge_confusion(g_true, g_hat);
  m.precision = m.confusion.precision();
  m.recall = m.confusion.recall();
  m.f1 = m.confusion.f1();
  m.shd = shd(g_true, g_hat);
  m.n_false_positive_edges = m.confusion.fp;
  m.cost = method_cost(g_hat, g_true, edge_costs(records, cfg));
  m.risk = method_risk(g_hat, g_true, records, cfg);
  return m;
}

std::string evaluations_to_csv(const std::vector<EvaluationRow>& rows) {
  std::ostringstream os;
  os << "scenario,seed,method,precision,recall,f1,shd,cost,risk,n_false_positive_edges\n";
  for (const auto& r : rows) {
    const auto& e = r.eval;
    os << r.scenario << ',' << r.seed << ',' << e.method << ',' << format_number(e.precision) << ','
       << format_number(e.recall) << ',' << format_number(e.f1) << ',' << e.shd << ',' << format_number(e.cost) << ','
       << format_number(e.risk) << ',' << e.n_false_positive_edges << '\n';
  }
  return os.str();
}

}  // namespace grid
