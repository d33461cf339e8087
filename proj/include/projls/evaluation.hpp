#pragma once

#include <cmath>
#include <string_view>

#include "projls/error.hpp"
#include "projls/estimators.hpp"
#include "projls/numerics.hpp"

namespace projls {

enum class Scope { TrainAll, UnlabeledOnly, Test };

inline std::string_view to_string(Scope s) {
  switch (s) {
    case Scope::TrainAll: return "train_all";
    case Scope::UnlabeledOnly: return "unlabeled_only";
    case Scope::Test: return "test";
  }
  return "unknown";
}

struct EvalRecord {
  double loss_sup = 0.0;
  double loss_semi = 0.0;
  double ratio = 1.0;
  double error_sup = 0.0;
  double error_semi = 0.0;
  Scope scope = Scope::TrainAll;
};

/// ||X w - y||^2, summed over rows.
inline double quadratic_loss(const WeightVector& w, const Matrix& X, const Vector& y) {
  if (X.rows() != y.size()) throw PreconditionError("quadratic_loss: X and y disagree in length");
  return (decision_values(w, X) - y).squaredNorm();
}

/// Fraction of rows whose 0.5-thresholded prediction differs from y.
inline double error_rate(const WeightVector& w, const Matrix& X, const Vector& y) {
  if (X.rows() != y.size()) throw PreconditionError("error_rate: X and y disagree in length");
  if (X.rows() == 0) return 0.0;
  const Vector pred = classify(w, X);
  return static_cast<double>((pred.array() != y.array()).count()) / static_cast<double>(y.size());
}

/// sqrt((w - w2)^T X_o^T X_o (w - w2)), evaluated as ||X_o (w - w2)||.
inline double metric_distance(const WeightVector& w, const WeightVector& w2, const Matrix& X_o) {
  if (w.size() != w2.size() || X_o.cols() != w.size()) {
    throw PreconditionError("metric_distance: dimension mismatch");
  }
  return (X_o * (w - w2)).norm();
}

inline double loss_ratio(const WeightVector& w_semi, const WeightVector& w_sup, const Matrix& X,
                         const Vector& y) {
  const double denom = quadratic_loss(w_sup, X, y);
  if (!(denom > 0.0)) throw DegenerateDenominator("loss_ratio: supervised loss is zero");
  return quadratic_loss(w_semi, X, y) / denom;
}

/// Worst-case loss increase of w over w_sup across all soft labelings of X_u:
/// max over y_u in [0,1]^{N_u} of L(w, X_e, y_e) - L(w_sup, X_e, y_e).
/// The difference is affine in each y_u,i, so the maximum sits at the vertex
/// y_u,i = 0 when x_i^T w > x_i^T w_sup and y_u,i = 1 otherwise.
inline double contrastive_value(const WeightVector& w, const WeightVector& w_sup, const Matrix& X,
                                const Vector& y, const Matrix& X_u) {
  double value = quadratic_loss(w, X, y) - quadratic_loss(w_sup, X, y);
  if (X_u.rows() == 0) return value;
  const Vector f = decision_values(w, X_u);
  const Vector f_sup = decision_values(w_sup, X_u);
  for (Eigen::Index i = 0; i < X_u.rows(); ++i) {
    const double label = f(i) > f_sup(i) ? 0.0 : 1.0;
    value += (f(i) - label) * (f(i) - label) - (f_sup(i) - label) * (f_sup(i) - label);
  }
  return value;
}

} // namespace projls
