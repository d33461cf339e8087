#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "projls/error.hpp"

namespace projls {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Returns X^T X. The upper triangle is computed and mirrored, so the result
/// is bit-symmetric.
inline Matrix gram(const Matrix& X) {
  Matrix G(X.cols(), X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double v = X.col(i).dot(X.col(j));
      G(i, j) = v;
      G(j, i) = v;
    }
  }
  return G;
}

namespace detail {

// Pivots whose square falls below this fraction of the original diagonal
// entry are treated as zero.
inline constexpr double kPivotRelTol = 1e-12;

inline Eigen::LLT<Matrix> factor_spd(const Matrix& A) {
  if (A.rows() != A.cols()) {
    throw PreconditionError("spd_solve: matrix is not square");
  }
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("spd_solve: non-positive pivot; add ridge regularization");
  }
  const Matrix& L = llt.matrixLLT();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const double pivot = L(i, i) * L(i, i);
    if (!(pivot > kPivotRelTol * std::abs(A(i, i))) || !std::isfinite(pivot)) {
      throw NotPositiveDefinite("spd_solve: pivot " + std::to_string(i) +
                                " numerically zero; add ridge regularization");
    }
  }
  return llt;
}

} // namespace detail

/// Solves A * X = B for symmetric positive-definite A through a Cholesky
/// factorization. Throws NotPositiveDefinite on a (numerically) non-positive pivot.
template <class Rhs>
auto spd_solve(const Matrix& A, const Eigen::MatrixBase<Rhs>& B) {
  if (B.rows() != A.rows()) {
    throw PreconditionError("spd_solve: right-hand side has wrong row count");
  }
  using Result = typename Eigen::internal::plain_matrix_type<Rhs>::type;
  Result sol = detail::factor_spd(A).solve(B);
  return sol;
}

namespace detail {

template <class Apply>
double rayleigh_power(const Apply& apply, Vector v, int max_iter) {
  double theta = 0.0;
  for (int k = 0; k < max_iter; ++k) {
    Vector hv = apply(v);
    const double nrm = hv.norm();
    if (nrm == 0.0) return 0.0;
    const double next = v.dot(hv);
    v = hv / nrm;
    if (k > 0 && std::abs(next - theta) <= 1e-12 * std::abs(next)) {
      theta = next;
      break;
    }
    theta = next;
  }
  // Final Rayleigh quotient for the last normalized iterate.
  return std::max(theta, v.dot(apply(v)));
}

} // namespace detail

/// Upper bound on the largest eigenvalue of a symmetric PSD matrix.
///
/// Power iteration (at most 200 steps) from the normalized all-ones vector and
/// from a normalized alternating-sign vector; the larger Rayleigh quotient is
/// inflated by 1%. The result is capped by the Gershgorin bound, which is
/// itself a valid upper bound.
///
/// `apply` computes H * v; it lets callers with a cheaper product (such as a
/// low-rank factorization of H) avoid dense matrix-vector products.
template <class Apply>
double spectral_bound(const Matrix& H, const Apply& apply) {
  const Eigen::Index n = H.rows();
  if (n == 0) return 0.0;
  constexpr int kMaxIter = 200;

  Vector ones = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  Vector alt(n);
  for (Eigen::Index i = 0; i < n; ++i) alt(i) = (i % 2 == 0) ? 1.0 : -1.0;
  alt /= alt.norm();

  const double estimate = std::max(detail::rayleigh_power(apply, ones, kMaxIter),
                                   detail::rayleigh_power(apply, alt, kMaxIter));
  const double gershgorin = H.cwiseAbs().rowwise().sum().maxCoeff();
  return std::min(1.01 * std::max(estimate, 0.0), gershgorin);
}

inline double spectral_bound(const Matrix& H) {
  return spectral_bound(H, [&H](const Vector& v) -> Vector { return H * v; });
}

inline bool all_finite(const Matrix& M) { return M.allFinite(); }

} // namespace projls
