#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>

#include "projls/error.hpp"
#include "projls/numerics.hpp"

namespace projls {

/// Convex quadratic J(y) = 1/2 y^T H y + g^T y + c over the unit box [0,1]^n.
///
/// When H = left^T * inner * left with left k x n and k << n (the projection
/// problems have k = d + 1), the factors may be supplied as well; products
/// with H then cost O(nk) instead of O(n^2). H itself must still be set.
struct BoxQP {
  Matrix H;
  Vector g;
  double c = 0.0;
  Matrix left;
  Matrix inner;

  [[nodiscard]] Eigen::Index dim() const { return g.size(); }
  [[nodiscard]] bool factored() const { return left.size() > 0 && left.cols() == g.size(); }

  [[nodiscard]] Vector apply_H(const Vector& y) const {
    if (factored()) return left.transpose() * (inner * (left * y));
    return H * y;
  }
};

struct QPSolution {
  Vector y;
  double objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// ||y - clip(y - grad)|| at exit.
  double pg_norm = 0.0;
};

struct QPOptions {
  double tol = 1e-8;
  std::size_t max_iter = 10'000;
};

inline double objective(const BoxQP& qp, const Vector& y) {
  return 0.5 * y.dot(qp.apply_H(y)) + qp.g.dot(y) + qp.c;
}

inline Vector gradient(const BoxQP& qp, const Vector& y) { return qp.apply_H(y) + qp.g; }

inline Vector clip_unit(const Vector& y) { return y.cwiseMax(0.0).cwiseMin(1.0); }

inline double projected_gradient_norm(const Vector& y, const Vector& grad) {
  return (y - clip_unit(y - grad)).norm();
}

/// Projected gradient descent with fixed step 1/L, L = spectral_bound(H).
///
/// Stops once ||y - clip(y - grad)|| <= tol * (1 + ||g||) or after max_iter
/// steps; the flag in the result distinguishes the two. Should a step ever
/// raise the objective (L underestimated), L is doubled and the step retried,
/// so iterates are monotone in J up to rounding.
inline QPSolution solve(const BoxQP& qp, const Vector& init, const QPOptions& opts = {}) {
  const Eigen::Index n = qp.dim();
  if (qp.H.rows() != n || qp.H.cols() != n || init.size() != n) {
    throw PreconditionError("qp::solve: dimension mismatch");
  }
  QPSolution sol;
  sol.y = clip_unit(init);
  if (n == 0) {
    sol.objective = qp.c;
    sol.converged = true;
    return sol;
  }

  double lipschitz = spectral_bound(qp.H, [&qp](const Vector& v) { return qp.apply_H(v); });
  if (lipschitz == 0.0) {
    // Linear objective: the box minimizer is a vertex.
    for (Eigen::Index i = 0; i < n; ++i) {
      if (qp.g(i) > 0.0) sol.y(i) = 0.0;
      else if (qp.g(i) < 0.0) sol.y(i) = 1.0;
    }
    sol.objective = objective(qp, sol.y);
    sol.pg_norm = projected_gradient_norm(sol.y, gradient(qp, sol.y));
    sol.converged = true;
    return sol;
  }

  const double threshold = opts.tol * (1.0 + qp.g.norm());
  Vector hy = qp.apply_H(sol.y);

  for (std::size_t it = 0;; ++it) {
    const Vector grad = hy + qp.g;
    sol.pg_norm = projected_gradient_norm(sol.y, grad);
    sol.iterations = it;
    if (sol.pg_norm <= threshold) {
      sol.converged = true;
      break;
    }
    if (it == opts.max_iter) break;

    // The change in J is evaluated as grad^T s + 1/2 s^T H s rather than as a
    // difference of objective values, which would lose it to cancellation.
    Vector next;
    Vector hnext;
    double decrease = 0.0;
    for (int attempt = 0;; ++attempt) {
      next = clip_unit(sol.y - grad / lipschitz);
      hnext = qp.apply_H(next);
      const Vector step = next - sol.y;
      const double linear = grad.dot(step);
      const double curvature = 0.5 * step.dot(hnext - hy);
      decrease = linear + curvature;
      if (decrease <= 1e-12 * (std::abs(linear) + std::abs(curvature)) || attempt == 60) break;
      lipschitz *= 2.0;
    }
    assert(decrease <= 1e-12 * (1.0 + std::abs(decrease)) + 1e-9);
    sol.y = std::move(next);
    hy = std::move(hnext);
  }
  sol.objective = 0.5 * sol.y.dot(hy) + qp.g.dot(sol.y) + qp.c;
  return sol;
}

inline QPSolution solve(const BoxQP& qp, const Vector& init, double tol, std::size_t max_iter) {
  return solve(qp, init, QPOptions{tol, max_iter});
}

/// Exhaustive search over {0, r, 2r, ..., 1}^n for n <= 2. Ties keep the
/// first point in lexicographic scan order.
inline Vector grid_oracle(const BoxQP& qp, double resolution) {
  const Eigen::Index n = qp.dim();
  if (n > 2) throw DimensionTooLarge("grid_oracle: supports at most 2 coordinates");
  if (!(resolution > 0.0 && resolution <= 1.0)) {
    throw PreconditionError("grid_oracle: resolution must be in (0, 1]");
  }
  if (n == 0) return Vector(0);
  const auto steps = static_cast<long>(std::llround(1.0 / resolution));
  auto point = [&](long k) { return k >= steps ? 1.0 : static_cast<double>(k) * resolution; };

  // Scalar evaluation of J; a grid at resolution 1e-3 has 10^6 points in 2-D.
  const double h00 = qp.H(0, 0);
  const double h01 = n == 2 ? 0.5 * (qp.H(0, 1) + qp.H(1, 0)) : 0.0;
  const double h11 = n == 2 ? qp.H(1, 1) : 0.0;
  const double g0 = qp.g(0);
  const double g1 = n == 2 ? qp.g(1) : 0.0;
  auto value = [&](double a, double b) {
    return 0.5 * (h00 * a * a + 2.0 * h01 * a * b + h11 * b * b) + g0 * a + g1 * b + qp.c;
  };

  Vector best = Vector::Zero(n);
  double best_value = std::numeric_limits<double>::infinity();
  const long inner_steps = n == 2 ? steps : 0;
  for (long a = 0; a <= steps; ++a) {
    const double ya = point(a);
    for (long b = 0; b <= inner_steps; ++b) {
      const double yb = n == 2 ? point(b) : 0.0;
      const double v = value(ya, yb);
      if (v < best_value) {
        best_value = v;
        best(0) = ya;
        if (n == 2) best(1) = yb;
      }
    }
  }
  return best;
}

} // namespace projls
