#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "projls/data.hpp"
#include "projls/error.hpp"
#include "projls/numerics.hpp"
#include "projls/qp.hpp"

namespace projls {

/// Linear classifier weights; entry 0 multiplies the bias column.
using WeightVector = Vector;

struct RidgeConfig {
  double lambda = 0.0;
  bool penalize_bias = false;
};

/// Which design matrix measures distance and which constraint set is used.
///   Projection:   metric X_e, set built from labeled + unlabeled data.
///   ICLS:         metric X (labeled only), same set as Projection.
///   Transductive: metric X_u, set built from the unlabeled data alone.
enum class Variant { Projection, ICLS, Transductive };

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Projection: return "projection";
    case Variant::ICLS: return "icls";
    case Variant::Transductive: return "transductive";
  }
  return "unknown";
}

struct ProjectionResult {
  WeightVector w_semi;
  Vector y_u_hat;
  double qp_objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double pg_norm = 0.0;
};

/// (X^T X + lambda I')^{-1} X^T y, where I' is the identity with the bias
/// entry zeroed unless ridge.penalize_bias. Labels may be fractional.
inline WeightVector fit_supervised(const Matrix& X, const Vector& y, const RidgeConfig& ridge = {}) {
  if (X.rows() != y.size()) throw PreconditionError("fit_supervised: X and y disagree in length");
  if (ridge.lambda < 0.0) throw PreconditionError("fit_supervised: lambda must be >= 0");
  Matrix G = gram(X);
  if (ridge.lambda > 0.0) {
    for (Eigen::Index j = ridge.penalize_bias ? 0 : 1; j < G.rows(); ++j) G(j, j) += ridge.lambda;
  }
  return spd_solve(G, Vector(X.transpose() * y));
}

/// Fit on labeled rows plus the unlabeled rows with their hidden true labels.
inline WeightVector fit_oracle(const SemiSplit& split, const RidgeConfig& ridge = {}) {
  if (split.y_u_true.size() != split.X_u.rows()) {
    throw PreconditionError("fit_oracle: split carries no true unlabeled labels");
  }
  return fit_supervised(split.extended_design(), split.extended_truth(), ridge);
}

inline Vector decision_values(const WeightVector& w, const Matrix& X) {
  if (X.cols() != w.size()) throw PreconditionError("decision_values: dimension mismatch");
  return X * w;
}

/// 1 where the decision value is at least 0.5, else 0.
inline Vector classify(const WeightVector& w, const Matrix& X) {
  return (decision_values(w, X).array() >= 0.5).cast<double>().matrix();
}

struct SelfLearningResult {
  WeightVector w;
  Vector pseudo_labels;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Self-learning wrapper around the least squares classifier. Every
/// unlabeled object receives a hard pseudo-label each round; the model is
/// refit on labeled plus pseudo-labeled data until the pseudo-labels stop
/// changing or max_iter refits have been done.
inline SelfLearningResult self_learning(const SemiSplit& split, const RidgeConfig& ridge = {},
                                        std::size_t max_iter = 100) {
  SelfLearningResult res;
  res.w = fit_supervised(split.X, split.y, ridge);
  if (split.n_unlabeled() == 0) {
    res.converged = true;
    return res;
  }
  const Matrix Xe = split.extended_design();
  Vector ye(Xe.rows());
  ye.head(split.y.size()) = split.y;

  Vector labels = classify(res.w, split.X_u);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    ye.tail(labels.size()) = labels;
    res.w = fit_supervised(Xe, ye, ridge);
    res.iterations = it;
    Vector next = classify(res.w, split.X_u);
    if (next == labels) {
      res.converged = true;
      break;
    }
    labels = std::move(next);
  }
  res.pseudo_labels = std::move(labels);
  return res;
}

inline WeightVector fit_self_learning(const SemiSplit& split, const RidgeConfig& ridge = {},
                                      std::size_t max_iter = 100) {
  return self_learning(split, ridge, max_iter).w;
}

/// Linear parametrisation of a constraint set: w(y_u) = offset + A_u y_u,
/// with offset = A_l y. `metric` is X_o^T X_o for the variant's distance.
struct ConstraintSet {
  Vector offset;
  Matrix A_u;
  Matrix metric;
  Variant variant = Variant::Projection;

  [[nodiscard]] WeightVector weights_for(const Vector& y_u) const {
    if (y_u.size() != A_u.cols()) throw PreconditionError("ConstraintSet: wrong label count");
    return offset + A_u * y_u;
  }
};

/// The metric's design matrix X_o for a variant.
inline Matrix metric_design(const SemiSplit& split, Variant variant) {
  switch (variant) {
    case Variant::Projection: return split.extended_design();
    case Variant::ICLS: return split.X;
    case Variant::Transductive: return split.X_u;
  }
  throw PreconditionError("metric_design: unknown variant");
}

/// Builds the constraint set with the unregularized least squares map, for
/// either the labeled + unlabeled set (Projection, ICLS) or the
/// unlabeled-only set (Transductive). Throws NotPositiveDefinite when the
/// relevant Gram matrix is singular.
inline ConstraintSet constraint_set(const SemiSplit& split, Variant variant) {
  ConstraintSet set;
  set.variant = variant;
  const auto d = split.X.cols();
  if (variant == Variant::Transductive) {
    set.A_u = spd_solve(gram(split.X_u), Matrix(split.X_u.transpose()));
    set.offset = Vector::Zero(d);
    set.metric = gram(split.X_u);
    return set;
  }
  const Matrix Xe = split.extended_design();
  const Matrix G = gram(Xe);
  const Matrix A = spd_solve(G, Matrix(Xe.transpose()));
  set.offset = A.leftCols(split.X.rows()) * split.y;
  set.A_u = A.rightCols(split.X_u.rows());
  set.metric = variant == Variant::Projection ? G : gram(split.X);
  return set;
}

/// Squared distance to `reference` as a quadratic in y_u:
/// H = 2 A_u^T M A_u, g = 2 A_u^T M r, c = r^T M r with r = offset - reference.
inline BoxQP projection_qp(const ConstraintSet& set, const WeightVector& reference) {
  const Vector r = set.offset - reference;
  const Matrix MA = set.metric * set.A_u;
  BoxQP qp;
  qp.H = 2.0 * (set.A_u.transpose() * MA);
  qp.H = 0.5 * (qp.H + qp.H.transpose()).eval();
  qp.g = 2.0 * (MA.transpose() * r);
  qp.c = r.dot(set.metric * r);
  qp.left = set.A_u;
  qp.inner = 2.0 * set.metric;
  return qp;
}

inline BoxQP build_projection_qp(const SemiSplit& split, Variant variant, const RidgeConfig& ridge = {}) {
  return projection_qp(constraint_set(split, variant), fit_supervised(split.X, split.y, ridge));
}

/// Projects `reference` onto the variant's constraint set. The QP starts at
/// clip(X_u reference, 0, 1), which is already optimal whenever every
/// unlabeled decision value lies in [0, 1] and reference is an unregularized fit.
inline ProjectionResult project(const SemiSplit& split, Variant variant, const WeightVector& reference,
                                const QPOptions& opts = {}) {
  const ConstraintSet set = constraint_set(split, variant);
  const BoxQP qp = projection_qp(set, reference);
  const Vector init = clip_unit(decision_values(reference, split.X_u));
  QPSolution sol = solve(qp, init, opts);

  ProjectionResult res;
  res.w_semi = set.weights_for(sol.y);
  res.y_u_hat = std::move(sol.y);
  res.qp_objective = sol.objective;
  res.iterations = sol.iterations;
  res.converged = sol.converged;
  res.pg_norm = sol.pg_norm;
  return res;
}

inline ProjectionResult fit_projected(const SemiSplit& split, Variant variant, const RidgeConfig& ridge = {},
                                      const QPOptions& opts = {}) {
  const WeightVector w_sup = fit_supervised(split.X, split.y, ridge);
  if (split.n_unlabeled() == 0 && variant != Variant::Transductive && ridge.lambda == 0.0) {
    // The constraint set is the single point w_sup.
    return ProjectionResult{w_sup, Vector(0), 0.0, 0, true, 0.0};
  }
  return project(split, variant, w_sup, opts);
}

/// True iff some unlabeled decision value falls outside [0, 1]; otherwise
/// w_sup already lies in the constraint set and the projection is a no-op.
inline bool needs_update(const WeightVector& w_sup, const Matrix& X_u) {
  if (X_u.rows() == 0) return false;
  const Vector f = decision_values(w_sup, X_u);
  return (f.array() > 1.0).any() || (f.array() < 0.0).any();
}

} // namespace projls
