#pragma once

#include "grid/dataset.hpp"
#include "grid/graph.hpp"
#include "grid/linalg.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace grid {

struct NsemConfig {
  double lambda1 = 0.1;
  double lambda2 = 0.01;
  double gamma_initial = 0.1;
  double gamma_growth = 10.0;
  int gamma_every = 50;
  double lr_primary = 0.01;
  double lr_secondary = 0.005;
  int epochs = 200;
  int batch_size = 32;
  int restarts = 3;
  std::uint64_t seed = 0;
  bool standardize = true;
  /// Per-variable tanh head on top of the linear map, trained with lr_secondary.
  bool nonlinear_head = false;
  int head_units = 4;
  double init_scale = 0.05;
  bool parallel_restarts = true;

  void validate() const;
  double gamma_at(int epoch) const;
};

/// Weighted reconstruction error of the linear map X ≈ XW:
///   (1/Σw) Σ_r w_r Σ_j (X − XW)_rj².
template <typename DW, typename DX, typename DV>
typename DW::Scalar nsem_reconstruction(const Eigen::MatrixBase<DW>& w, const Eigen::MatrixBase<DX>& x,
                                        const Eigen::MatrixBase<DV>& weights) {
  using Scalar = typename DW::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Matrix residual = x - x * w;
  return (weights.transpose() * residual.cwiseAbs2().rowwise().sum()).value() / weights.sum();
}

/// Full objective: reconstruction + λ1‖W‖₁ + λ2‖W‖₂² + γ·h(W).
template <typename DW, typename DX, typename DV>
typename DW::Scalar nsem_loss(const Eigen::MatrixBase<DW>& w, const Eigen::MatrixBase<DX>& x,
                              const Eigen::MatrixBase<DV>& weights, typename DW::Scalar lambda1,
                              typename DW::Scalar lambda2, typename DW::Scalar gamma) {
  return nsem_reconstruction(w, x, weights) + lambda1 * w.cwiseAbs().sum() + lambda2 * w.squaredNorm() +
         gamma * linalg::dag_penalty(w);
}

/// Gradient of nsem_loss with the diagonal masked to zero. The L1 term
/// contributes λ1·sign(W) (zero at W_ij = 0).
template <typename DW, typename DX, typename DV>
Eigen::Matrix<typename DW::Scalar, Eigen::Dynamic, Eigen::Dynamic> nsem_gradient(
    const Eigen::MatrixBase<DW>& w, const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DV>& weights,
    typename DW::Scalar lambda1, typename DW::Scalar lambda2, typename DW::Scalar gamma) {
  using Scalar = typename DW::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Matrix residual = x - x * w;
  Matrix g = Scalar(-2) / weights.sum() * (x.transpose() * weights.asDiagonal() * residual);
  g += lambda1 * w.unaryExpr([](Scalar v) { return v > Scalar(0) ? Scalar(1) : (v < Scalar(0) ? Scalar(-1) : Scalar(0)); });
  g += Scalar(2) * lambda2 * w;
  g += gamma * linalg::dag_penalty_gradient(w);
  g.diagonal().setZero();
  return g;
}

struct NsemResult {
  /// Trained weights of the best restart (diagonal zero).
  Eigen::MatrixXd weights;
  /// Final full-data objective of every restart and the index chosen.
  std::vector<double> restart_losses;
  int best_restart = 0;
  double loss = 0.0;
};

/// 0/1 matrix of entries W_ij allowed to be non-zero: off-diagonal pairs that
/// the constraints admit (no output sources, no forbidden edges).
Eigen::MatrixXd admissible_mask(const std::vector<Variable>& variables, const StructuralConstraints& constraints);

/// Mini-batch proximal gradient training, best of `restarts`. Entries outside
/// `mask` (when given) are held at zero.
NsemResult train_nsem(const Dataset& data, const NsemConfig& cfg, const Eigen::MatrixXd* mask = nullptr);

struct ThresholdResult {
  double tau = 0.1;
  DirectedGraph graph;
  /// W restricted to the kept edges; its support is acyclic.
  Eigen::MatrixXd pruned;
};

/// Largest-gap midpoint over sorted off-diagonal |W_ij|; 0.1 when fewer than 3
/// distinct magnitudes exist.
double adaptive_threshold(const Eigen::MatrixXd& w);

ThresholdResult threshold_edges(const Eigen::MatrixXd& w, const std::vector<Variable>& variables,
                                const StructuralConstraints& constraints);

struct NsemOutput {
  NsemResult training;
  ThresholdResult threshold;
};

NsemOutput run_nsem(const Dataset& data, const NsemConfig& cfg, const StructuralConstraints& constraints);

std::string matrix_to_csv(const std::vector<Variable>& variables, const Eigen::MatrixXd& w);

}  // namespace grid
