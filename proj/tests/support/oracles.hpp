#pragma once

// Test-side reference implementations. None of these call into the library
// routines they are used to check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "projls/data.hpp"
#include "projls/rng.hpp"

namespace oracle {

using projls::Matrix;
using projls::Vector;

// Cyclic Jacobi rotations; returns eigenvalues of a symmetric matrix, sorted.
inline std::vector<double> jacobi_eigenvalues(Matrix A, int sweeps = 100) {
  const auto n = A.rows();
  for (int s = 0; s < sweeps; ++s) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) off += A(i, j) * A(i, j);
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(A(p, q)) < 1e-300) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - sn * akq;
          A(k, q) = sn * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - sn * aqk;
          A(q, k) = sn * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = A(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

// Plain triple-loop X^T X.
inline Matrix naive_gram(const Matrix& X) {
  Matrix G = Matrix::Zero(X.cols(), X.cols());
  for (Eigen::Index i = 0; i < X.cols(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j)
      for (Eigen::Index k = 0; k < X.rows(); ++k) G(i, j) += X(k, i) * X(k, j);
  return G;
}

// Gauss-Jordan elimination with partial pivoting.
inline Matrix gauss_solve(Matrix A, Matrix B) {
  const auto n = A.rows();
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index piv = c;
    for (Eigen::Index r = c + 1; r < n; ++r)
      if (std::abs(A(r, c)) > std::abs(A(piv, c))) piv = r;
    A.row(c).swap(A.row(piv));
    B.row(c).swap(B.row(piv));
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = A(r, c) / A(c, c);
      A.row(r) -= f * A.row(c);
      B.row(r) -= f * B.row(c);
    }
  }
  for (Eigen::Index r = 0; r < n; ++r) B.row(r) /= A(r, r);
  return B;
}

// Least squares fit through the normal equations with the Gauss-Jordan solver.
inline Vector least_squares(const Matrix& X, const Vector& y, double lambda = 0.0, bool penalize_bias = false) {
  Matrix G = naive_gram(X);
  for (Eigen::Index j = penalize_bias ? 0 : 1; j < G.rows(); ++j) G(j, j) += lambda;
  Matrix rhs = X.transpose() * y;
  return gauss_solve(G, rhs).col(0);
}

inline double sq_loss(const Vector& w, const Matrix& X, const Vector& y) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double f = 0.0;
    for (Eigen::Index j = 0; j < X.cols(); ++j) f += X(i, j) * w(j);
    s += (f - y(i)) * (f - y(i));
  }
  return s;
}

inline Matrix random_matrix(projls::Rng& rng, Eigen::Index r, Eigen::Index c) {
  Matrix M(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) M(i, j) = rng.normal();
  return M;
}

inline Vector random_vector(projls::Rng& rng, Eigen::Index n) { return random_matrix(rng, n, 1).col(0); }

inline Vector random_unit_box(projls::Rng& rng, Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform01();
  return v;
}

// B^T B with a rank of at most `rank`.
inline Matrix random_psd(projls::Rng& rng, Eigen::Index n, Eigen::Index rank) {
  const Matrix B = random_matrix(rng, rank, n);
  Matrix H = B.transpose() * B;
  return 0.5 * (H + H.transpose());
}

inline Matrix random_spd(projls::Rng& rng, Eigen::Index n) {
  return random_psd(rng, n, n + 2) + 0.5 * Matrix::Identity(n, n);
}

// Two Gaussian classes in d dimensions; bias-augmented blocks.
struct GaussianSplitSpec {
  Eigen::Index d = 5;
  Eigen::Index n_labeled = 10;
  Eigen::Index n_unlabeled = 50;
  Eigen::Index n_test = 0;
  double separation = 1.5;
};

inline projls::SemiSplit gaussian_split(std::uint64_t seed, const GaussianSplitSpec& spec = {}) {
  projls::Rng rng(projls::Seed{seed});
  auto block = [&](Eigen::Index n, Matrix& X, Vector& y, bool balanced) {
    X.resize(n, spec.d + 1);
    y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int label = balanced ? static_cast<int>(i % 2) : static_cast<int>(rng.uniform_index(2));
      y(i) = label;
      X(i, 0) = 1.0;
      for (Eigen::Index j = 1; j <= spec.d; ++j) {
        X(i, j) = rng.normal() + (label == 1 ? spec.separation / 2 : -spec.separation / 2) * (j == 1 ? 1.0 : 0.3);
      }
    }
  };
  Matrix X, Xu, Xt;
  Vector y, yu, yt;
  block(spec.n_labeled, X, y, true);
  block(spec.n_unlabeled, Xu, yu, false);
  block(spec.n_test, Xt, yt, false);
  return projls::SemiSplit::from_blocks(X, y, Xu, yu, Xt, yt);
}

inline Matrix stack(const Matrix& A, const Matrix& B) {
  Matrix out(A.rows() + B.rows(), A.cols());
  out << A, B;
  return out;
}

inline Vector stack(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

// Distance between two weight vectors in the metric of design X_o, from the
// explicit predictions.
inline double prediction_distance(const Vector& w, const Vector& w2, const Matrix& X_o) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < X_o.rows(); ++i) {
    const double diff = X_o.row(i).dot(w) - X_o.row(i).dot(w2);
    s += diff * diff;
  }
  return std::sqrt(s);
}

// Max over a grid in [0,1]^n (n <= 2) of f.
template <class F>
double grid_max(Eigen::Index n, double step, const F& f) {
  const long steps = std::lround(1.0 / step);
  double best = -std::numeric_limits<double>::infinity();
  Vector y(n);
  if (n == 0) return f(y);
  for (long a = 0; a <= steps; ++a) {
    y(0) = std::min(1.0, a * step);
    if (n == 1) {
      best = std::max(best, f(y));
      continue;
    }
    for (long b = 0; b <= steps; ++b) {
      y(1) = std::min(1.0, b * step);
      best = std::max(best, f(y));
    }
  }
  return best;
}

} // namespace oracle
