#include "grid/nsem.hpp"

#include "grid/errors.hpp"
#include "grid/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <random>
#include <sstream>

namespace grid {

void NsemConfig::validate() const {
  if (!(lambda1 > 0 && lambda2 > 0 && gamma_initial > 0 && gamma_growth > 0 && lr_primary > 0 && lr_secondary > 0))
    throw InvalidArgument("NSEM rates and penalties must be positive");
  if (epochs < 1) throw InvalidArgument("NSEM epochs must be >= 1");
  if (batch_size < 1 || restarts < 1 || gamma_every < 1 || head_units < 1)
    throw InvalidArgument("NSEM batch size, restarts, schedule and head width must be >= 1");
}

double NsemConfig::gamma_at(int epoch) const {
  return gamma_initial * std::pow(gamma_growth, static_cast<double>(epoch / gamma_every));
}

namespace {

struct Prepared {
  Eigen::MatrixXd x;
  Eigen::VectorXd w;
};

Prepared prepare(const Dataset& data, bool standardize) {
  Prepared p{data.values, data.weights};
  const Eigen::VectorXd mean = linalg::weighted_mean(p.x, p.w);
  p.x.rowwise() -= mean.transpose();
  if (standardize) {
    const Eigen::VectorXd var = (p.w.transpose() * p.x.cwiseAbs2()).transpose() / p.w.sum();
    for (Eigen::Index j = 0; j < p.x.cols(); ++j)
      if (var(j) > 0) p.x.col(j) /= std::sqrt(var(j));
  }
  return p;
}

void soft_threshold(Eigen::MatrixXd& w, double t) {
  w = w.unaryExpr([t](double v) { return v > t ? v - t : (v < -t ? v + t : 0.0); });
  w.diagonal().setZero();
}

// Optional tanh head: x̂_j = z_j + Σ_h v_jh tanh(u_jh z_j + b_jh), z = XW.
struct Head {
  Eigen::MatrixXd u, v, b;  // n × units

  Eigen::MatrixXd forward(const Eigen::MatrixXd& z) const {
    Eigen::MatrixXd out = z;
    for (Eigen::Index h = 0; h < u.cols(); ++h)
      for (Eigen::Index j = 0; j < z.cols(); ++j)
        out.col(j).array() += v(j, h) * (u(j, h) * z.col(j).array() + b(j, h)).tanh();
    return out;
  }
};

double head_loss(const Eigen::MatrixXd& w, const Head& head, const Eigen::MatrixXd& x, const Eigen::VectorXd& wt,
                 const NsemConfig& cfg, double gamma) {
  const Eigen::MatrixXd r = x - head.forward(x * w);
  return (wt.transpose() * r.cwiseAbs2().rowwise().sum()).value() / wt.sum() + cfg.lambda1 * w.cwiseAbs().sum() +
         cfg.lambda2 * w.squaredNorm() + gamma * linalg::dag_penalty(w);
}

struct RestartOutcome {
  Eigen::MatrixXd w;
  double loss = 0.0;
};

RestartOutcome train_restart(const Prepared& p, const NsemConfig& cfg, const Eigen::MatrixXd& mask, int restart) {
  const Eigen::Index n = p.x.cols();
  const Eigen::Index rows = p.x.rows();
  std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(restart)));
  std::normal_distribution<double> normal(0.0, cfg.init_scale);
  Eigen::MatrixXd w = Eigen::MatrixXd::NullaryExpr(n, n, [&]() { return normal(rng); });
  w = w.cwiseProduct(mask);

  Head head;
  if (cfg.nonlinear_head) {
    std::normal_distribution<double> unit(0.0, 0.5);
    head.u = Eigen::MatrixXd::NullaryExpr(n, cfg.head_units, [&]() { return unit(rng); });
    head.v = Eigen::MatrixXd::Zero(n, cfg.head_units);
    head.b = Eigen::MatrixXd::Zero(n, cfg.head_units);
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(rows));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Eigen::MatrixXd xb;
  Eigen::VectorXd wb;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double gamma = cfg.gamma_at(epoch);
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index start = 0; start < rows; start += cfg.batch_size) {
      const Eigen::Index len = std::min<Eigen::Index>(cfg.batch_size, rows - start);
      xb.resize(len, n);
      wb.resize(len);
      for (Eigen::Index r = 0; r < len; ++r) {
        xb.row(r) = p.x.row(order[static_cast<std::size_t>(start + r)]);
        wb(r) = p.w(order[static_cast<std::size_t>(start + r)]);
      }
      Eigen::MatrixXd grad;
      if (!cfg.nonlinear_head) {
        // Smooth part only; the L1 term is handled by the proximal step.
        grad = nsem_gradient(w, xb, wb, 0.0, cfg.lambda2, gamma);
      } else {
        const Eigen::MatrixXd z = xb * w;
        const Eigen::MatrixXd r = xb - head.forward(z);
        const Eigen::MatrixXd g_out = (-2.0 / wb.sum()) * (wb.asDiagonal() * r);
        Eigen::MatrixXd dz = g_out;
        Eigen::MatrixXd du(n, cfg.head_units), dv(n, cfg.head_units), db(n, cfg.head_units);
        for (Eigen::Index h = 0; h < cfg.head_units; ++h)
          for (Eigen::Index j = 0; j < n; ++j) {
            const Eigen::ArrayXd t = (head.u(j, h) * z.col(j).array() + head.b(j, h)).tanh();
            const Eigen::ArrayXd dt = 1.0 - t.square();
            const Eigen::ArrayXd g = g_out.col(j).array();
            dv(j, h) = (g * t).sum();
            du(j, h) = (g * head.v(j, h) * dt * z.col(j).array()).sum();
            db(j, h) = (g * head.v(j, h) * dt).sum();
            dz.col(j).array() += g * head.v(j, h) * head.u(j, h) * dt;
          }
        grad = xb.transpose() * dz + 2.0 * cfg.lambda2 * w + gamma * linalg::dag_penalty_gradient(w);
        grad.diagonal().setZero();
        head.u -= cfg.lr_secondary * du;
        head.v -= cfg.lr_secondary * dv;
        head.b -= cfg.lr_secondary * db;
      }
      w -= cfg.lr_primary * grad;
      soft_threshold(w, cfg.lr_primary * cfg.lambda1);
      w = w.cwiseProduct(mask);
    }
    if (!w.allFinite()) throw NonFinite("NSEM weights diverged (restart " + std::to_string(restart) + ")");
  }
  const double gamma = cfg.gamma_at(cfg.epochs - 1);
  const double loss = cfg.nonlinear_head ? head_loss(w, head, p.x, p.w, cfg, gamma)
                                         : nsem_loss(w, p.x, p.w, cfg.lambda1, cfg.lambda2, gamma);
  if (!std::isfinite(loss)) throw NonFinite("NSEM loss is not finite (restart " + std::to_string(restart) + ")");
  return {std::move(w), loss};
}

}  // namespace

Eigen::MatrixXd admissible_mask(const std::vector<Variable>& variables, const StructuralConstraints& constraints) {
  const DirectedGraph g(variables);
  Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(g.size(), g.size());
  for (int i = 0; i < g.size(); ++i)
    for (int j = 0; j < g.size(); ++j)
      if (i != j && constraints.admits(g, {i, j})) mask(i, j) = 1.0;
  return mask;
}

NsemResult train_nsem(const Dataset& data, const NsemConfig& cfg, const Eigen::MatrixXd* mask_in) {
  cfg.validate();
  if (data.rows() < cfg.batch_size) throw InvalidArgument("NSEM needs at least batch_size samples");
  const Prepared p = prepare(data, cfg.standardize);
  const auto n = static_cast<Eigen::Index>(data.cols());
  Eigen::MatrixXd mask = mask_in ? *mask_in : Eigen::MatrixXd::Ones(n, n);
  if (mask.rows() != n || mask.cols() != n) throw NodeMismatch("NSEM mask does not match the variable count");
  mask.diagonal().setZero();

  std::vector<RestartOutcome> outcomes;
  if (cfg.parallel_restarts && cfg.restarts > 1) {
    std::vector<std::future<RestartOutcome>> jobs;
    for (int r = 0; r < cfg.restarts; ++r)
      jobs.push_back(std::async(std::launch::async, [&p, &cfg, &mask, r] { return train_restart(p, cfg, mask, r); }));
    for (auto& j : jobs) outcomes.push_back(j.get());
  } else {
    for (int r = 0; r < cfg.restarts; ++r) outcomes.push_back(train_restart(p, cfg, mask, r));
  }

  NsemResult out;
  for (int r = 0; r < cfg.restarts; ++r) {
    out.restart_losses.push_back(outcomes[static_cast<std::size_t>(r)].loss);
    if (outcomes[static_cast<std::size_t>(r)].loss < outcomes[static_cast<std::size_t>(out.best_restart)].loss)
      out.best_restart = r;
  }
  out.weights = outcomes[static_cast<std::size_t>(out.best_restart)].w;
  out.loss = out.restart_losses[static_cast<std::size_t>(out.best_restart)];
  return out;
}

double adaptive_threshold(const Eigen::MatrixXd& w) {
  std::vector<double> mags;
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      if (i != j) mags.push_back(std::abs(w(i, j)));
  std::sort(mags.begin(), mags.end(), std::greater<>());
  std::vector<double> distinct = mags;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3) return 0.1;
  double best_gap = -1.0, tau = 0.1;
  for (std::size_t k = 0; k + 1 < distinct.size(); ++k) {
    const double gap = distinct[k] - distinct[k + 1];
    if (gap > best_gap) {
      best_gap = gap;
      tau = 0.5 * (distinct[k] + distinct[k + 1]);
    }
  }
  return tau;
}

ThresholdResult threshold_edges(const Eigen::MatrixXd& w, const std::vector<Variable>& variables,
                                const StructuralConstraints& constraints) {
  const auto n = static_cast<Eigen::Index>(variables.size());
  if (w.rows() != n || w.cols() != n) throw NodeMismatch("weight matrix does not match the variable list");
  ThresholdResult out;
  out.tau = adaptive_threshold(w);
  AdjacencyMatrix a = AdjacencyMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && std::abs(w(i, j)) > out.tau) a(i, j) = 1;
  DirectedGraph g = apply_constraints(DirectedGraph(variables, a), constraints);
  a = g.adjacency();
  // A flipped required edge has no weight of its own; borrow the reverse one.
  auto magnitude = [&](const Edge& e) {
    return std::max(std::abs(w(e.source, e.target)), a(e.target, e.source) ? 0.0 : std::abs(w(e.target, e.source)));
  };
  for (auto cycle = find_cycle(a); !cycle.empty(); cycle = find_cycle(a)) {
    const auto weakest = std::min_element(cycle.begin(), cycle.end(),
                                          [&](const Edge& x, const Edge& y) { return magnitude(x) < magnitude(y); });
    a(weakest->source, weakest->target) = 0;
  }
  out.graph = g.with_adjacency(a);
  out.pruned = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : out.graph.edges()) out.pruned(e.source, e.target) = w(e.source, e.target);
  return out;
}

NsemOutput run_nsem(const Dataset& data, const NsemConfig& cfg, const StructuralConstraints& constraints) {
  NsemOutput out;
  const Eigen::MatrixXd mask = admissible_mask(data.variables, constraints);
  out.training = train_nsem(data, cfg, &mask);
  out.threshold = threshold_edges(out.training.weights, data.variables, constraints);
  return out;
}

std::string matrix_to_csv(const std::vector<Variable>& variables, const Eigen::MatrixXd& w) {
  std::ostringstream os;
  os << "source";
  for (const auto& v : variables) os << ',' << v.name;
  os << '\n';
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    os << variables.at(static_cast<std::size_t>(i)).name;
    for (Eigen::Index j = 0; j < w.cols(); ++j) os << ',' << format_number(w(i, j));
    os << '\n';
  }
  return os.str();
}

}  // namespace grid
