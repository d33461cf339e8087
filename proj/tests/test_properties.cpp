#include <gtest/gtest.h>

#include "oracles.hpp"
#include "projls/estimators.hpp"
#include "projls/evaluation.hpp"

using namespace projls;

namespace {

constexpr int kSplits = 30;

double rel(double base) { return 1e-9 * (1.0 + base); }

} // namespace

TEST(NonDegradation, ProjectionNeverIncreasesTrainingLoss) {
  for (std::uint64_t seed = 0; seed < kSplits; ++seed) {
    const SemiSplit s = oracle::gaussian_split(seed);
    const ProjectionResult r = fit_projected(s, Variant::Projection);
    ASSERT_TRUE(r.converged);
    const Matrix X_e = s.extended_design();
    const Vector y_e = s.extended_truth();
    const double sup = oracle::sq_loss(oracle::least_squares(s.X, s.y), X_e, y_e);
    EXPECT_LE(oracle::sq_loss(r.w_semi, X_e, y_e), sup + rel(sup)) << "seed " << seed;
  }
}

TEST(NonDegradation, HoldsWithRidgeRegularizedSupervised) {
  for (double lambda : {0.01, 1.0, 100.0}) {
    for (std::uint64_t seed = 0; seed < kSplits; ++seed) {
      const SemiSplit s = oracle::gaussian_split(seed);
      const RidgeConfig ridge{lambda};
      const ProjectionResult r = fit_projected(s, Variant::Projection, ridge);
      if (!r.converged) continue;
      const Matrix X_e = s.extended_design();
      const Vector y_e = s.extended_truth();
      const double sup = oracle::sq_loss(oracle::least_squares(s.X, s.y, lambda), X_e, y_e);
      EXPECT_LE(oracle::sq_loss(r.w_semi, X_e, y_e), sup + rel(sup)) << "lambda " << lambda << " seed " << seed;
    }
  }
}

TEST(NonDegradation, TransductiveImprovesUnlabeledLoss) {
  for (std::uint64_t seed = 0; seed < kSplits; ++seed) {
    const SemiSplit s = oracle::gaussian_split(seed);
    const ProjectionResult r = fit_projected(s, Variant::Transductive);
    ASSERT_TRUE(r.converged);
    const double sup = oracle::sq_loss(oracle::least_squares(s.X, s.y), s.X_u, s.y_u_true);
    EXPECT_LE(oracle::sq_loss(r.w_semi, s.X_u, s.y_u_true), sup + rel(sup)) << "seed " << seed;
  }
}

TEST(ProjectionInequality, PointwiseOverRandomLabelings) {
  Rng rng(Seed{21});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SemiSplit s = oracle::gaussian_split(seed);
    const ProjectionResult r = fit_projected(s, Variant::Projection);
    const Vector w_sup = fit_supervised(s.X, s.y);
    const ConstraintSet set = constraint_set(s, Variant::Projection);
    const Matrix X_e = s.extended_design();
    for (int t = 0; t < 100; ++t) {
      const Vector w = set.weights_for(oracle::random_unit_box(rng, 50));
      EXPECT_LE(oracle::prediction_distance(r.w_semi, w, X_e), oracle::prediction_distance(w_sup, w, X_e) + 1e-9);
    }
  }
}

TEST(ConstraintSet, IsConvex) {
  Rng rng(Seed{22});
  const SemiSplit s = oracle::gaussian_split(5);
  const ConstraintSet set = constraint_set(s, Variant::Projection);
  for (int t = 0; t < 100; ++t) {
    const Vector y1 = oracle::random_unit_box(rng, 50);
    const Vector y2 = oracle::random_unit_box(rng, 50);
    const double k = rng.uniform01();
    const Vector mixed = set.weights_for(k * y1 + (1 - k) * y2);
    const Vector mix = k * set.weights_for(y1) + (1 - k) * set.weights_for(y2);
    EXPECT_LE((mixed - mix).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(ConstraintSet, WeightsAreLeastSquaresFits) {
  Rng rng(Seed{23});
  const SemiSplit s = oracle::gaussian_split(6);
  const ConstraintSet set = constraint_set(s, Variant::Projection);
  const Vector yu = oracle::random_unit_box(rng, 50);
  const Vector ref = oracle::least_squares(s.extended_design(), oracle::stack(s.y, yu));
  EXPECT_LE((set.weights_for(yu) - ref).norm(), 1e-9);
  EXPECT_THROW(set.weights_for(Vector::Zero(3)), PreconditionError);
}

TEST(Projection, IsIdempotentFromGeneratingLabels) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SemiSplit s = oracle::gaussian_split(seed);
    for (Variant v : {Variant::Projection, Variant::ICLS, Variant::Transductive}) {
      const ProjectionResult first = fit_projected(s, v);
      const ConstraintSet set = constraint_set(s, v);
      const QPSolution again = solve(projection_qp(set, first.w_semi), first.y_u_hat);
      EXPECT_TRUE(again.converged);
      EXPECT_LE((set.weights_for(again.y) - first.w_semi).norm(), 1e-8) << to_string(v) << " seed " << seed;
    }
  }
}

TEST(Projection, ReprojectionFromDefaultStartStaysClose) {
  // w_semi lies on the boundary of the set, where the box QP is degenerate
  // and fixed-step projected gradient converges slowly; the bound here is
  // what the default options deliver, not the exact fixed point.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SemiSplit s = oracle::gaussian_split(seed);
    const ProjectionResult first = fit_projected(s, Variant::Projection);
    const ProjectionResult again = project(s, Variant::Projection, first.w_semi);
    EXPECT_LE((again.w_semi - first.w_semi).norm(), 1e-3) << "seed " << seed;
    EXPECT_LE(again.qp_objective, 1e-5) << "seed " << seed;
  }
}

TEST(Projection, NoUpdateWhenSupervisedIsFeasible) {
  // Unlabeled points taken close to the labeled ones keep decision values in [0, 1].
  Matrix X(4, 2);
  X << 1, 0, 1, 1, 1, 0.2, 1, 0.8;
  const Vector y = (Vector(4) << 0, 1, 0, 1).finished();
  Matrix Xu(5, 2);
  Xu << 1, 0.1, 1, 0.3, 1, 0.5, 1, 0.7, 1, 0.9;
  const SemiSplit s = SemiSplit::from_blocks(X, y, Xu, Vector::Zero(5));
  const Vector w_sup = fit_supervised(s.X, s.y);
  ASSERT_FALSE(needs_update(w_sup, s.X_u));
  EXPECT_LE((fit_projected(s, Variant::Projection).w_semi - w_sup).norm(), 1e-8);
}

TEST(Icls, MinimizesLabeledLossOverTheta) {
  Rng rng(Seed{24});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SemiSplit s = oracle::gaussian_split(seed);
    const ProjectionResult r = fit_projected(s, Variant::ICLS);
    const ConstraintSet set = constraint_set(s, Variant::ICLS);
    const double best = oracle::sq_loss(r.w_semi, s.X, s.y);
    for (int t = 0; t < 100; ++t) {
      const Vector w = set.weights_for(oracle::random_unit_box(rng, 50));
      EXPECT_LE(best, oracle::sq_loss(w, s.X, s.y) + 1e-9);
    }
  }
}

TEST(Metric, EqualsPredictionDifference) {
  Rng rng(Seed{25});
  for (int t = 0; t < 100; ++t) {
    const Matrix X_o = oracle::random_matrix(rng, 20, 4);
    const Vector w = oracle::random_vector(rng, 4), w2 = oracle::random_vector(rng, 4);
    const Vector diff = w - w2;
    const double quadratic = diff.dot(oracle::naive_gram(X_o) * diff);
    const double d = metric_distance(w, w2, X_o);
    EXPECT_NEAR(d * d, quadratic, 1e-10 * (1.0 + quadratic));
    EXPECT_NEAR(d, oracle::prediction_distance(w, w2, X_o), 1e-10 * (1.0 + d));
  }
}

TEST(Contrastive, ProjectionIsLocallyOptimal) {
  // Nearby members of Theta: perturb the soft labels of w_semi and map them back.
  Rng rng(Seed{26});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SemiSplit s = oracle::gaussian_split(seed);
    const ProjectionResult r = fit_projected(s, Variant::Projection);
    const Vector w_sup = fit_supervised(s.X, s.y);
    const ConstraintSet set = constraint_set(s, Variant::Projection);
    const double c_semi = contrastive_value(r.w_semi, w_sup, s.X, s.y, s.X_u);
    for (int t = 0; t < 100; ++t) {
      Vector yu = r.y_u_hat;
      for (Eigen::Index i = 0; i < yu.size(); ++i) yu(i) += 0.05 * (rng.uniform01() - 0.5);
      yu = clip_unit(yu);
      const double c = contrastive_value(set.weights_for(yu), w_sup, s.X, s.y, s.X_u);
      EXPECT_LE(c_semi, c + 1e-7);
    }
  }
}

TEST(Projection, UniqueInWeightsFromAnyInit) {
  // N_u > d + 1 makes H singular, so the soft labels are not unique.
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SemiSplit s = oracle::gaussian_split(seed);
    const ConstraintSet set = constraint_set(s, Variant::Projection);
    const BoxQP qp = projection_qp(set, fit_supervised(s.X, s.y));
    Rng rng(Seed{seed + 100});
    Vector first;
    for (int k = 0; k < 5; ++k) {
      const QPSolution sol = solve(qp, oracle::random_unit_box(rng, 50), QPOptions{1e-10, 200000});
      const Vector w = set.weights_for(sol.y);
      if (k == 0) first = w;
      else EXPECT_LE((w - first).norm(), 1e-6);
    }
  }
}
