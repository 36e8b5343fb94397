#pragma once

// Dense numeric kernels shared by the structure learners. Everything here is
// templated on the Eigen expression type so float, double and long double
// callers (and tests) can use the same code paths.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <optional>
#include <span>

namespace grid::linalg {

/// Kish effective sample size (sum w)^2 / sum w^2.
template <typename Derived>
typename Derived::Scalar effective_sample_size(const Eigen::MatrixBase<Derived>& weights) {
  using Scalar = typename Derived::Scalar;
  const Scalar s = weights.sum();
  const Scalar s2 = weights.squaredNorm();
  return s2 > Scalar(0) ? s * s / s2 : Scalar(0);
}

/// Column means of `x` under row weights `w`.
template <typename DerivedX, typename DerivedW>
Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, 1> weighted_mean(
    const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedW>& w) {
  return (x.transpose() * w) / w.sum();
}

/// Weighted covariance (normalised by the weight sum) of the columns of `x`.
template <typename DerivedX, typename DerivedW>
Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, Eigen::Dynamic> weighted_covariance(
    const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedW>& w) {
  using Scalar = typename DerivedX::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const auto mean = weighted_mean(x, w);
  const Matrix centered = x.rowwise() - mean.transpose();
  return (centered.transpose() * w.asDiagonal() * centered) / w.sum();
}

/// Converts a covariance matrix to a correlation matrix. Zero-variance
/// columns get a zero row/column with a unit diagonal.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> covariance_to_correlation(
    const Eigen::MatrixBase<Derived>& cov) {
  using Scalar = typename Derived::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vector inv_sd = cov.diagonal().cwiseSqrt();
  for (Eigen::Index i = 0; i < inv_sd.size(); ++i) inv_sd(i) = inv_sd(i) > Scalar(0) ? Scalar(1) / inv_sd(i) : Scalar(0);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> corr = inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
  corr.diagonal().setOnes();
  return corr;
}

template <typename DerivedX, typename DerivedW>
Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, Eigen::Dynamic> weighted_correlation(
    const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedW>& w) {
  return covariance_to_correlation(weighted_covariance(x, w));
}

/// Partial correlation of variables `i` and `j` given `cond`, read off the
/// inverse of the correlation submatrix over {i, j} ∪ cond. Returns nullopt
/// when that submatrix is numerically singular.
template <typename Derived>
std::optional<typename Derived::Scalar> partial_correlation(const Eigen::MatrixBase<Derived>& corr, int i, int j,
                                                            std::span<const int> cond) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const auto k = static_cast<Eigen::Index>(cond.size() + 2);
  Matrix sub(k, k);
  auto index = [&](Eigen::Index a) { return a == 0 ? i : (a == 1 ? j : cond[static_cast<std::size_t>(a - 2)]); };
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = corr(index(a), index(b));

  Eigen::FullPivLU<Matrix> lu(sub);
  lu.setThreshold(Scalar(1e-10));
  if (!lu.isInvertible()) return std::nullopt;
  const Matrix precision = lu.inverse();
  const Scalar denom = std::sqrt(precision(0, 0) * precision(1, 1));
  if (!(denom > Scalar(0))) return std::nullopt;
  Scalar r = -precision(0, 1) / denom;
  if (r > Scalar(1)) r = Scalar(1);
  if (r < Scalar(-1)) r = Scalar(-1);
  return r;
}

/// Differentiable acyclicity measure h(W) = tr(exp(W∘W)) - n.
/// Zero exactly when the support of W is acyclic.
template <typename Derived>
typename Derived::Scalar dag_penalty(const Eigen::MatrixBase<Derived>& w) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Matrix squared = w.cwiseProduct(w);
  const Matrix e = squared.exp();
  const Scalar h = e.trace() - Scalar(w.rows());
  return h < Scalar(0) ? Scalar(0) : h;
}

/// Gradient of dag_penalty: 2 · exp(W∘W)^T ∘ W.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> dag_penalty_gradient(
    const Eigen::MatrixBase<Derived>& w) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Matrix squared = w.cwiseProduct(w);
  const Matrix e = squared.exp();
  return Scalar(2) * e.transpose().cwiseProduct(w);
}

/// Both h(W) and its gradient from a single matrix exponential.
template <typename Derived>
std::pair<typename Derived::Scalar, Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>>
dag_penalty_with_gradient(const Eigen::MatrixBase<Derived>& w) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Matrix squared = w.cwiseProduct(w);
  const Matrix e = squared.exp();
  Scalar h = e.trace() - Scalar(w.rows());
  if (h < Scalar(0)) h = Scalar(0);
  return {h, Scalar(2) * e.transpose().cwiseProduct(w)};
}

}  // namespace grid::linalg
