#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <future>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "projls/data.hpp"
#include "projls/error.hpp"
#include "projls/estimators.hpp"
#include "projls/evaluation.hpp"
#include "projls/report.hpp"
#include "projls/rng.hpp"

namespace projls {

enum class Protocol { LossRatio, LearningCurve, CrossValidation };

enum class Estimator { Supervised, SelfLearning, Projection, ICLS, Transductive, Oracle };

inline constexpr Estimator kAllEstimators[] = {Estimator::Supervised, Estimator::SelfLearning,
                                               Estimator::Projection, Estimator::ICLS,
                                               Estimator::Transductive, Estimator::Oracle};

inline std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::LossRatio: return "loss_ratio";
    case Protocol::LearningCurve: return "learning_curve";
    case Protocol::CrossValidation: return "cross_validation";
  }
  return "unknown";
}

inline std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::Supervised: return "supervised";
    case Estimator::SelfLearning: return "self_learning";
    case Estimator::Projection: return "projection";
    case Estimator::ICLS: return "icls";
    case Estimator::Transductive: return "transductive";
    case Estimator::Oracle: return "oracle";
  }
  return "unknown";
}

inline Estimator parse_estimator(std::string_view name) {
  for (Estimator e : kAllEstimators) {
    if (to_string(e) == name) return e;
  }
  if (name == "self-learning" || name == "selflearning") return Estimator::SelfLearning;
  throw PreconditionError("unknown estimator '" + std::string(name) + "'");
}

/// Parses "a,b,c"; duplicates are dropped, order is canonical.
inline std::vector<Estimator> parse_estimator_list(std::string_view list) {
  std::vector<bool> chosen(std::size(kAllEstimators), false);
  std::string item;
  std::istringstream in{std::string(list)};
  while (std::getline(in, item, ',')) {
    const auto t = detail::trim(item);
    if (t.empty()) continue;
    chosen[static_cast<std::size_t>(parse_estimator(t))] = true;
  }
  std::vector<Estimator> out;
  for (Estimator e : kAllEstimators) {
    if (chosen[static_cast<std::size_t>(e)]) out.push_back(e);
  }
  if (out.empty()) throw PreconditionError("estimator list is empty");
  return out;
}

inline std::vector<std::size_t> default_curve_sizes() {
  std::vector<std::size_t> sizes;
  for (std::size_t s = 2; s <= 512; s *= 2) sizes.push_back(s);
  return sizes;
}

struct ExperimentConfig {
  Protocol protocol = Protocol::LossRatio;
  std::vector<Estimator> estimators = {Estimator::Supervised, Estimator::SelfLearning,
                                       Estimator::Projection};
  std::size_t n_repeats = 100;
  Seed seed{};
  RidgeConfig ridge{};
  std::string dataset_name = "dataset";
  bool standardize = false;
  /// Off makes reports byte-reproducible; timing is the only nondeterministic field.
  bool record_wall_time = true;
  /// Repeats run on this many worker threads; output does not depend on it.
  std::size_t threads = 1;
  QPOptions qp{};
  std::size_t self_learning_max_iter = 100;

  // Loss-ratio protocol. n_labeled defaults to 2d.
  std::optional<std::size_t> n_labeled;
  std::size_t n_unlabeled = 1000;
  std::size_t n_test = 1000;

  // Learning-curve protocol. The unlabeled pool is capped so the test set
  // keeps at least this fraction of the objects left after labeling.
  std::vector<std::size_t> curve_sizes = default_curve_sizes();
  double curve_min_test_fraction = 0.5;

  // Cross-validation protocol. cv_labeled defaults to d + 5.
  std::size_t folds = 10;
  std::optional<std::size_t> cv_labeled;
};

struct SkippedTrial {
  long repeat = 0;
  long fold = -1;
  long n_unlabeled = 0;
  std::string estimator;  // empty: every estimator of the trial was skipped
  std::string reason;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;
  std::vector<SkippedTrial> skipped;
  std::size_t trials = 0;  // work units attempted (repeat x unlabeled size or repeat)
};

struct FitOutcome {
  WeightVector w;
  bool converged = true;
  double wall_ms = 0.0;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

inline FitOutcome fit_estimator(Estimator e, const SemiSplit& split, const ExperimentConfig& cfg) {
  const auto start = Clock::now();
  FitOutcome out;
  switch (e) {
    case Estimator::Supervised: out.w = fit_supervised(split.X, split.y, cfg.ridge); break;
    case Estimator::Oracle: out.w = fit_oracle(split, cfg.ridge); break;
    case Estimator::SelfLearning: {
      auto res = self_learning(split, cfg.ridge, cfg.self_learning_max_iter);
      out.w = std::move(res.w);
      out.converged = res.converged;
      break;
    }
    case Estimator::Projection:
    case Estimator::ICLS:
    case Estimator::Transductive: {
      const Variant v = e == Estimator::Projection ? Variant::Projection
                        : e == Estimator::ICLS     ? Variant::ICLS
                                                   : Variant::Transductive;
      auto res = fit_projected(split, v, cfg.ridge, cfg.qp);
      out.w = std::move(res.w_semi);
      out.converged = res.converged;
      break;
    }
  }
  out.wall_ms = cfg.record_wall_time ? elapsed_ms(start) : 0.0;
  return out;
}

struct UnitResult {
  std::vector<ReportRow> rows;
  std::vector<SkippedTrial> skipped;
  std::size_t trials = 0;
};

inline long as_long(std::size_t v) { return static_cast<long>(v); }

inline std::size_t default_labeled_loss_ratio(const Dataset& ds, const ExperimentConfig& cfg) {
  return cfg.n_labeled.value_or(2 * ds.dims());
}

/// Fits every configured estimator on `split` and evaluates each scope.
/// The supervised fit is always computed since every ratio refers to it.
inline void evaluate_split(const SemiSplit& split, const ExperimentConfig& cfg, long repeat,
                           const std::vector<Scope>& scopes, UnitResult& unit) {
  ++unit.trials;
  FitOutcome sup;
  try {
    sup = fit_estimator(Estimator::Supervised, split, cfg);
  } catch (const Error& err) {
    unit.skipped.push_back({repeat, -1, as_long(split.n_unlabeled()), "", err.what()});
    return;
  }

  struct ScopeData {
    Scope scope;
    Matrix X;
    Vector y;
    double loss_sup;
  };
  std::vector<ScopeData> data;
  for (Scope s : scopes) {
    ScopeData sd{s, {}, {}, 0.0};
    if (s == Scope::TrainAll) {
      sd.X = split.extended_design();
      sd.y = split.extended_truth();
    } else if (s == Scope::UnlabeledOnly) {
      sd.X = split.X_u;
      sd.y = split.y_u_true;
    } else {
      sd.X = split.X_test;
      sd.y = split.y_test;
    }
    if (sd.X.rows() == 0) continue;
    sd.loss_sup = quadratic_loss(sup.w, sd.X, sd.y);
    if (!(sd.loss_sup > 0.0)) {
      unit.skipped.push_back({repeat, -1, as_long(split.n_unlabeled()), "",
                              std::string("supervised loss is zero on scope ") + std::string(to_string(s))});
      return;
    }
    data.push_back(std::move(sd));
  }

  for (Estimator e : cfg.estimators) {
    FitOutcome fit;
    if (e == Estimator::Supervised) {
      fit = sup;
    } else {
      try {
        fit = fit_estimator(e, split, cfg);
      } catch (const Error& err) {
        unit.skipped.push_back({repeat, -1, as_long(split.n_unlabeled()), std::string(to_string(e)), err.what()});
        continue;
      }
    }
    for (const auto& sd : data) {
      const double loss = quadratic_loss(fit.w, sd.X, sd.y);
      ReportRow row;
      row.protocol = std::string(to_string(cfg.protocol));
      row.dataset = cfg.dataset_name;
      row.estimator = std::string(to_string(e));
      row.repeat = repeat;
      row.fold = -1;
      row.n_labeled = as_long(split.n_labeled());
      row.n_unlabeled = as_long(split.n_unlabeled());
      row.scope = std::string(to_string(sd.scope));
      row.loss = loss / static_cast<double>(sd.X.rows());
      row.error = error_rate(fit.w, sd.X, sd.y);
      row.ratio = e == Estimator::Supervised ? 1.0 : loss / sd.loss_sup;
      row.converged = fit.converged;
      row.wall_time_ms = fit.wall_ms;
      unit.rows.push_back(std::move(row));
    }
  }
}

inline void check_dataset(const Dataset& ds) {
  if (!ds.labels) throw PreconditionError("experiment: dataset has no labels");
  if (ds.has_missing()) throw PreconditionError("experiment: dataset has missing values; impute first");
}

inline UnitResult loss_ratio_unit(const Dataset& ds, const ExperimentConfig& cfg, std::size_t r) {
  UnitResult unit;
  Rng rng(cfg.seed.offset(r));
  SplitSizes sizes{default_labeled_loss_ratio(ds, cfg), cfg.n_unlabeled, cfg.n_test, true, true};
  SemiSplit split = sample_split(ds, sizes, rng);
  if (cfg.standardize) standardize(split);
  evaluate_split(split, cfg, as_long(r), {Scope::TrainAll, Scope::Test}, unit);
  return unit;
}

inline UnitResult learning_curve_unit(const Dataset& ds, const ExperimentConfig& cfg, std::size_t r) {
  UnitResult unit;
  Rng rng(cfg.seed.offset(r));
  const std::size_t n_lab = cfg.n_labeled.value_or(2 * ds.dims());
  if (n_lab > ds.rows()) throw InsufficientRows("learning curve: more labeled objects than rows");
  IndexList order(ds.rows());
  for (Index i = 0; i < ds.rows(); ++i) order[i] = i;
  rng.shuffle(order);

  const std::size_t remaining = ds.rows() - n_lab;
  const auto max_size = cfg.curve_sizes.empty()
                            ? std::size_t{0}
                            : *std::max_element(cfg.curve_sizes.begin(), cfg.curve_sizes.end());
  const auto test_floor = static_cast<std::size_t>(std::ceil(cfg.curve_min_test_fraction *
                                                             static_cast<double>(remaining)));
  const std::size_t pool_size = std::min(max_size, remaining - std::min(remaining, test_floor));

  const auto begin = order.begin();
  IndexList labeled(begin, begin + static_cast<std::ptrdiff_t>(n_lab));
  IndexList pool(begin + static_cast<std::ptrdiff_t>(n_lab),
                 begin + static_cast<std::ptrdiff_t>(n_lab + pool_size));
  IndexList test(begin + static_cast<std::ptrdiff_t>(n_lab + pool_size), order.end());

  for (std::size_t size : cfg.curve_sizes) {
    if (size > pool_size) continue;
    IndexList unlabeled(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(size));
    SemiSplit split = split_from_rows(ds, labeled, std::move(unlabeled), test);
    if (cfg.standardize) standardize(split);
    evaluate_split(split, cfg, as_long(r), {Scope::Test}, unit);
  }
  return unit;
}

} // namespace detail

/// Predictions of one cross-validation repeat; each object is predicted by
/// the model trained without its fold.
struct CvRepeatResult {
  std::map<Estimator, Vector> decision;        // per object
  std::map<Estimator, bool> converged;
  std::map<Estimator, double> wall_ms;
  std::vector<unsigned> prediction_count;       // per object, over all folds
  std::size_t n_labeled = 0;
  std::size_t max_unlabeled = 0;
  std::vector<SkippedTrial> skipped;
  bool supervised_failed = false;
};

inline CvRepeatResult cross_validation_repeat(const Dataset& ds, const ExperimentConfig& cfg, std::size_t r) {
  CvRepeatResult out;
  Rng rng(cfg.seed.offset(r));
  const auto folds = kfold_indices(ds.rows(), cfg.folds, Seed{rng.next_u64()});
  const std::size_t n_lab = cfg.cv_labeled.value_or(ds.dims() + 5);
  out.n_labeled = n_lab;
  out.prediction_count.assign(ds.rows(), 0);

  std::vector<Estimator> wanted = cfg.estimators;
  if (std::find(wanted.begin(), wanted.end(), Estimator::Supervised) == wanted.end()) {
    wanted.insert(wanted.begin(), Estimator::Supervised);
  }
  for (Estimator e : wanted) {
    out.decision[e] = Vector::Zero(static_cast<Eigen::Index>(ds.rows()));
    out.converged[e] = true;
    out.wall_ms[e] = 0.0;
  }

  std::vector<bool> in_fold(ds.rows());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::fill(in_fold.begin(), in_fold.end(), false);
    for (Index i : folds[f]) in_fold[i] = true;
    IndexList pool;
    for (Index i = 0; i < ds.rows(); ++i) {
      if (!in_fold[i]) pool.push_back(i);
    }
    if (pool.size() < n_lab) throw InsufficientRows("cross validation: training portion smaller than labeled count");
    rng.shuffle(pool);
    IndexList labeled(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_lab));
    IndexList unlabeled(pool.begin() + static_cast<std::ptrdiff_t>(n_lab), pool.end());
    out.max_unlabeled = std::max(out.max_unlabeled, unlabeled.size());
    SemiSplit split = split_from_rows(ds, std::move(labeled), std::move(unlabeled), folds[f]);
    if (cfg.standardize) standardize(split);

    for (Estimator e : wanted) {
      if (!out.decision.contains(e)) continue;  // already failed in an earlier fold
      try {
        FitOutcome fit = detail::fit_estimator(e, split, cfg);
        const Vector f_test = decision_values(fit.w, split.X_test);
        for (std::size_t k = 0; k < folds[f].size(); ++k) {
          out.decision[e](static_cast<Eigen::Index>(folds[f][k])) = f_test(static_cast<Eigen::Index>(k));
        }
        out.converged[e] = out.converged[e] && fit.converged;
        out.wall_ms[e] += fit.wall_ms;
      } catch (const Error& err) {
        out.skipped.push_back({static_cast<long>(r), static_cast<long>(f), static_cast<long>(split.n_unlabeled()),
                               e == Estimator::Supervised ? "" : std::string(to_string(e)), err.what()});
        out.decision.erase(e);
        if (e == Estimator::Supervised) {
          out.supervised_failed = true;
          return out;
        }
      }
    }
    for (Index i : folds[f]) ++out.prediction_count[i];
  }
  return out;
}

namespace detail {

inline UnitResult cross_validation_unit(const Dataset& ds, const ExperimentConfig& cfg, std::size_t r) {
  UnitResult unit;
  unit.trials = 1;
  CvRepeatResult res = cross_validation_repeat(ds, cfg, r);
  unit.skipped = std::move(res.skipped);
  if (res.supervised_failed) return unit;

  const Vector& truth = *ds.labels;
  const auto n = static_cast<double>(ds.rows());
  const double loss_sup = (res.decision.at(Estimator::Supervised) - truth).squaredNorm();
  for (Estimator e : cfg.estimators) {
    auto it = res.decision.find(e);
    if (it == res.decision.end()) continue;
    const Vector& f = it->second;
    const double loss = (f - truth).squaredNorm();
    const Vector pred = (f.array() >= 0.5).cast<double>().matrix();
    ReportRow row;
    row.protocol = std::string(to_string(cfg.protocol));
    row.dataset = cfg.dataset_name;
    row.estimator = std::string(to_string(e));
    row.repeat = as_long(r);
    row.fold = -1;
    row.n_labeled = as_long(res.n_labeled);
    row.n_unlabeled = as_long(res.max_unlabeled);
    row.scope = std::string(to_string(Scope::Test));
    row.loss = loss / n;
    row.error = static_cast<double>((pred.array() != truth.array()).count()) / n;
    row.ratio = e == Estimator::Supervised ? 1.0 : (loss_sup > 0.0 ? loss / loss_sup : 1.0);
    row.converged = res.converged.at(e);
    row.wall_time_ms = res.wall_ms.at(e);
    unit.rows.push_back(std::move(row));
  }
  return unit;
}

inline std::size_t estimator_rank(const std::string& name) {
  for (std::size_t k = 0; k < std::size(kAllEstimators); ++k) {
    if (to_string(kAllEstimators[k]) == name) return k;
  }
  return std::size(kAllEstimators);
}

inline std::size_t scope_rank(const std::string& name) {
  if (name == "train_all") return 0;
  if (name == "unlabeled_only") return 1;
  return 2;
}

template <class Unit>
ExperimentReport run_units(const Dataset& ds, const ExperimentConfig& cfg, Unit unit_fn) {
  check_dataset(ds);
  if (cfg.n_repeats < 1) throw PreconditionError("experiment: n_repeats must be >= 1");
  if (cfg.estimators.empty()) throw PreconditionError("experiment: no estimators");

  std::vector<UnitResult> units(cfg.n_repeats);
  const std::size_t workers = std::max<std::size_t>(1, cfg.threads);
  if (workers == 1) {
    for (std::size_t r = 0; r < cfg.n_repeats; ++r) units[r] = unit_fn(ds, cfg, r);
  } else {
    for (std::size_t begin = 0; begin < cfg.n_repeats; begin += workers) {
      std::vector<std::future<UnitResult>> batch;
      const std::size_t end = std::min(cfg.n_repeats, begin + workers);
      for (std::size_t r = begin; r < end; ++r) {
        batch.push_back(std::async(std::launch::async, [&, r] { return unit_fn(ds, cfg, r); }));
      }
      for (std::size_t r = begin; r < end; ++r) units[r] = batch[r - begin].get();
    }
  }

  ExperimentReport report;
  for (auto& u : units) {
    report.rows.insert(report.rows.end(), u.rows.begin(), u.rows.end());
    report.skipped.insert(report.skipped.end(), u.skipped.begin(), u.skipped.end());
    report.trials += u.trials;
  }
  std::stable_sort(report.rows.begin(), report.rows.end(), [](const ReportRow& a, const ReportRow& b) {
    return std::tuple(estimator_rank(a.estimator), a.repeat, a.fold, a.n_unlabeled, scope_rank(a.scope)) <
           std::tuple(estimator_rank(b.estimator), b.repeat, b.fold, b.n_unlabeled, scope_rank(b.scope));
  });
  return report;
}

} // namespace detail

/// Per repeat r (seed + r): 2d labeled objects without replacement, then
/// n_unlabeled and n_test objects drawn with replacement from the full
/// dataset. Rows cover scopes train_all (labeled + unlabeled with true
/// labels) and test.
inline ExperimentReport run_loss_ratio(const Dataset& ds, ExperimentConfig cfg) {
  cfg.protocol = Protocol::LossRatio;
  return detail::run_units(ds, cfg, detail::loss_ratio_unit);
}

/// Per repeat: 2d labeled objects; an unlabeled pool and a disjoint test set
/// from the rest; nested unlabeled subsets of each requested size. Sizes
/// larger than the pool are left out.
inline ExperimentReport run_learning_curve(const Dataset& ds, ExperimentConfig cfg) {
  cfg.protocol = Protocol::LearningCurve;
  return detail::run_units(ds, cfg, detail::learning_curve_unit);
}

/// Per repeat: k folds; each held-out fold is predicted from d + 5 labeled
/// objects drawn from the other folds, the rest of which act as unlabeled
/// data. One row per estimator and repeat.
inline ExperimentReport run_cross_validation(const Dataset& ds, ExperimentConfig cfg) {
  cfg.protocol = Protocol::CrossValidation;
  return detail::run_units(ds, cfg, detail::cross_validation_unit);
}

inline ExperimentReport run_experiment(const Dataset& ds, const ExperimentConfig& cfg) {
  switch (cfg.protocol) {
    case Protocol::LossRatio: return run_loss_ratio(ds, cfg);
    case Protocol::LearningCurve: return run_learning_curve(ds, cfg);
    case Protocol::CrossValidation: return run_cross_validation(ds, cfg);
  }
  throw PreconditionError("unknown protocol");
}

inline constexpr double kNonDegradationTolerance = 1e-9;

/// Converged projection rows on train_all whose loss ratio exceeds 1 + 1e-9.
/// Any such row falsifies the non-degradation guarantee.
inline std::vector<ReportRow> nondegradation_violations(const std::vector<ReportRow>& rows) {
  std::vector<ReportRow> bad;
  for (const auto& r : rows) {
    if (r.estimator == "projection" && r.scope == "train_all" && r.converged &&
        r.ratio > 1.0 + kNonDegradationTolerance) {
      bad.push_back(r);
    }
  }
  return bad;
}

struct SummaryRow {
  std::string estimator;
  long n_unlabeled = 0;
  std::string scope;
  std::size_t count = 0;
  double mean_loss = 0.0;
  double se_loss = 0.0;
  double mean_error = 0.0;
  double se_error = 0.0;
};

/// Mean and standard error (sample sd / sqrt(n)) of loss and error, grouped
/// by (estimator, n_unlabeled, scope).
inline std::vector<SummaryRow> summarize(const std::vector<ReportRow>& rows) {
  using Key = std::tuple<std::size_t, long, std::size_t>;
  std::map<Key, std::vector<const ReportRow*>> groups;
  for (const auto& r : rows) {
    groups[{detail::estimator_rank(r.estimator), r.n_unlabeled, detail::scope_rank(r.scope)}].push_back(&r);
  }
  auto mean_se = [](const std::vector<double>& v) {
    const auto n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    if (v.size() < 2) return std::pair{mean, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::pair{mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
  };
  std::vector<SummaryRow> out;
  for (const auto& [key, members] : groups) {
    std::vector<double> losses;
    std::vector<double> errors;
    for (const auto* r : members) {
      losses.push_back(r->loss);
      errors.push_back(r->error);
    }
    SummaryRow s;
    s.estimator = members.front()->estimator;
    s.n_unlabeled = members.front()->n_unlabeled;
    s.scope = members.front()->scope;
    s.count = members.size();
    std::tie(s.mean_loss, s.se_loss) = mean_se(losses);
    std::tie(s.mean_error, s.se_error) = mean_se(errors);
    out.push_back(std::move(s));
  }
  return out;
}

/// Loads a CSV dataset and median-imputes any missing feature cells.
inline Dataset prepare_dataset(const std::string& path, const std::string& label_column) {
  Dataset ds = load_csv(path, label_column);
  if (ds.has_missing()) ds = impute_median(std::move(ds));
  return ds;
}

} // namespace projls
