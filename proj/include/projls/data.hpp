#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "projls/csv.hpp"
#include "projls/error.hpp"
#include "projls/numerics.hpp"
#include "projls/rng.hpp"

namespace projls {

using Index = std::size_t;
using IndexList = std::vector<Index>;

/// Feature table with optional binary labels. Missing feature cells are NaN
/// until impute_median has run; the bias column is never stored here.
struct Dataset {
  Matrix features;
  std::optional<Vector> labels;
  std::vector<std::string> feature_names;
  std::string label_name;
  /// Original label strings; class_names[k] was mapped to k.
  std::vector<std::string> class_names;

  [[nodiscard]] Index rows() const { return static_cast<Index>(features.rows()); }
  [[nodiscard]] Index dims() const { return static_cast<Index>(features.cols()); }
  [[nodiscard]] bool has_missing() const { return features.hasNaN(); }
};

/// Labeled, unlabeled and test blocks of one resampling. All design matrices
/// are bias-augmented (column 0 is all ones). y_u_true is hidden from the
/// semi-supervised estimators and is used only by the oracle and evaluation.
struct SemiSplit {
  Matrix X;
  Vector y;
  Matrix X_u;
  Vector y_u_true;
  Matrix X_test;
  Vector y_test;
  // Row indices into the source dataset (empty when built from blocks).
  IndexList labeled_rows;
  IndexList unlabeled_rows;
  IndexList test_rows;

  [[nodiscard]] Index n_labeled() const { return static_cast<Index>(X.rows()); }
  [[nodiscard]] Index n_unlabeled() const { return static_cast<Index>(X_u.rows()); }
  [[nodiscard]] Index n_test() const { return static_cast<Index>(X_test.rows()); }
  [[nodiscard]] Index cols() const { return static_cast<Index>(X.cols()); }

  /// X_e = [X; X_u].
  [[nodiscard]] Matrix extended_design() const {
    Matrix Xe(X.rows() + X_u.rows(), X.cols());
    Xe << X, X_u;
    return Xe;
  }
  /// y_e* = [y; y_u_true].
  [[nodiscard]] Vector extended_truth() const {
    Vector ye(y.size() + y_u_true.size());
    ye << y, y_u_true;
    return ye;
  }

  /// Throws PreconditionError unless every block invariant holds.
  void validate() const {
    auto fail = [](const std::string& what) { throw PreconditionError("SemiSplit: " + what); };
    if (X.rows() < 1) fail("needs at least one labeled row");
    if (y.size() != X.rows()) fail("label count differs from labeled rows");
    if (y_u_true.size() != 0 && y_u_true.size() != X_u.rows()) fail("hidden label count mismatch");
    if (y_test.size() != X_test.rows()) fail("test label count mismatch");
    const auto d = X.cols();
    if (d < 1) fail("design has no columns");
    if (X_u.rows() > 0 && X_u.cols() != d) fail("unlabeled column count mismatch");
    if (X_test.rows() > 0 && X_test.cols() != d) fail("test column count mismatch");
    for (const Matrix* m : {&X, &X_u, &X_test}) {
      if (m->rows() == 0) continue;
      if (!m->allFinite()) fail("non-finite entry");
      if ((m->col(0).array() != 1.0).any()) fail("first column is not the bias column");
    }
  }

  /// Builds a split from already bias-augmented blocks and validates it.
  static SemiSplit from_blocks(Matrix X, Vector y, Matrix X_u, Vector y_u_true = {},
                               Matrix X_test = {}, Vector y_test = {}) {
    SemiSplit s;
    s.X = std::move(X);
    s.y = std::move(y);
    s.X_u = X_u.size() == 0 ? Matrix(0, s.X.cols()) : std::move(X_u);
    s.y_u_true = std::move(y_u_true);
    s.X_test = X_test.size() == 0 ? Matrix(0, s.X.cols()) : std::move(X_test);
    s.y_test = std::move(y_test);
    s.validate();
    return s;
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

inline std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

} // namespace detail

/// Parses CSV text into a Dataset. The label column (looked up by header
/// name) must hold exactly two distinct strings; the lexicographically
/// smaller one becomes 0. Pass an empty label_column for an unlabeled table.
inline Dataset parse_dataset(std::string_view text, const std::string& label_column) {
  auto records = csv::parse(text);
  std::erase_if(records, [](const csv::Record& r) {
    return r.size() == 1 && detail::trim(r[0]).empty();
  });
  if (records.empty()) throw ParseError("csv: empty input");

  const csv::Record& header = records.front();
  const bool header_numeric = std::all_of(header.begin(), header.end(), [](const std::string& f) {
    const auto t = detail::trim(f);
    return !t.empty() && detail::parse_number(t).has_value();
  });
  if (header_numeric) throw ParseError("csv: header row missing");

  std::optional<std::size_t> label_idx;
  if (!label_column.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (detail::trim(header[j]) == label_column) label_idx = j;
    }
    if (!label_idx) throw ParseError("csv: label column '" + label_column + "' not in header");
  }

  Dataset ds;
  ds.label_name = label_column;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (label_idx && j == *label_idx) continue;
    ds.feature_names.emplace_back(detail::trim(header[j]));
  }

  const std::size_t n = records.size() - 1;
  const auto d = static_cast<Eigen::Index>(ds.feature_names.size());
  ds.features.resize(static_cast<Eigen::Index>(n), d);
  std::vector<std::string> raw_labels;
  raw_labels.reserve(n);

  for (std::size_t i = 0; i < n; ++i) {
    const csv::Record& rec = records[i + 1];
    if (rec.size() != header.size()) {
      throw ParseError("csv: row " + std::to_string(i + 2) + " has " + std::to_string(rec.size()) +
                       " fields, header has " + std::to_string(header.size()));
    }
    Eigen::Index col = 0;
    for (std::size_t j = 0; j < rec.size(); ++j) {
      if (label_idx && j == *label_idx) {
        const auto lab = detail::trim(rec[j]);
        if (lab.empty()) throw ParseError("csv: missing label on row " + std::to_string(i + 2));
        raw_labels.emplace_back(lab);
        continue;
      }
      const auto v = detail::parse_number(rec[j]);
      if (!v) {
        throw ParseError("csv: non-numeric value '" + rec[j] + "' on row " + std::to_string(i + 2));
      }
      ds.features(static_cast<Eigen::Index>(i), col++) = *v;
    }
  }

  if (label_idx) {
    const std::set<std::string> distinct(raw_labels.begin(), raw_labels.end());
    if (distinct.size() != 2) {
      throw LabelCardinality("label column '" + label_column + "' has " +
                             std::to_string(distinct.size()) + " distinct values, expected 2");
    }
    ds.class_names.assign(distinct.begin(), distinct.end());
    Vector labels(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      labels(static_cast<Eigen::Index>(i)) = raw_labels[i] == ds.class_names[0] ? 0.0 : 1.0;
    }
    ds.labels = std::move(labels);
  }
  return ds;
}

inline Dataset load_csv(const std::string& path, const std::string& label_column) {
  return parse_dataset(csv::read_file(path), label_column);
}

/// Median of a non-empty list; even counts average the two middle values.
inline double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

/// Replaces each missing cell by its column's median over present cells.
inline Dataset impute_median(Dataset ds) {
  for (Eigen::Index j = 0; j < ds.features.cols(); ++j) {
    auto col = ds.features.col(j);
    if (!col.hasNaN()) continue;
    std::vector<double> present;
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (!std::isnan(col(i))) present.push_back(col(i));
    }
    if (present.empty()) {
      throw AllMissing("column '" + ds.feature_names.at(static_cast<std::size_t>(j)) +
                       "' has no values to impute from");
    }
    const double fill = median(std::move(present));
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::isnan(col(i))) col(i) = fill;
    }
  }
  return ds;
}

/// Prepends a column of ones. Not idempotent.
inline Matrix augment_bias(const Matrix& features) {
  Matrix out(features.rows(), features.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(features.cols()) = features;
  return out;
}

inline Matrix select_rows(const Matrix& M, const IndexList& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), M.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = M.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

inline Vector select_entries(const Vector& v, const IndexList& rows) {
  Vector out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

/// Assembles a bias-augmented split from explicit row index lists.
inline SemiSplit split_from_rows(const Dataset& ds, IndexList labeled, IndexList unlabeled,
                                 IndexList test) {
  if (!ds.labels) throw PreconditionError("split_from_rows: dataset has no labels");
  if (ds.has_missing()) throw PreconditionError("split_from_rows: impute missing values first");
  SemiSplit s;
  s.X = augment_bias(select_rows(ds.features, labeled));
  s.y = select_entries(*ds.labels, labeled);
  s.X_u = augment_bias(select_rows(ds.features, unlabeled));
  s.y_u_true = select_entries(*ds.labels, unlabeled);
  s.X_test = augment_bias(select_rows(ds.features, test));
  s.y_test = select_entries(*ds.labels, test);
  s.labeled_rows = std::move(labeled);
  s.unlabeled_rows = std::move(unlabeled);
  s.test_rows = std::move(test);
  s.validate();
  return s;
}

struct SplitSizes {
  Index n_labeled = 0;
  Index n_unlabeled = 0;
  Index n_test = 0;
  /// With replacement: drawn from the full dataset. Without: from rows not yet used.
  bool unlabeled_with_replacement = false;
  bool test_with_replacement = false;
};

/// Draws a split using an existing generator. Labeled rows never repeat.
inline SemiSplit sample_split(const Dataset& ds, const SplitSizes& sizes, Rng& rng) {
  const Index n = ds.rows();
  if (sizes.n_labeled < 1) throw PreconditionError("sample_split: need at least one labeled row");

  IndexList pool(n);
  for (Index i = 0; i < n; ++i) pool[i] = i;
  rng.shuffle(pool);
  std::size_t next = 0;

  auto take_without = [&](Index count, const char* what) {
    if (next + count > pool.size()) {
      throw InsufficientRows(std::string("sample_split: not enough rows left for ") + what);
    }
    IndexList out(pool.begin() + static_cast<std::ptrdiff_t>(next),
                  pool.begin() + static_cast<std::ptrdiff_t>(next + count));
    next += count;
    return out;
  };
  auto take_with = [&](Index count) {
    IndexList out(count);
    for (auto& i : out) i = static_cast<Index>(rng.uniform_index(n));
    return out;
  };

  IndexList labeled = take_without(sizes.n_labeled, "labeled objects");
  IndexList unlabeled = sizes.unlabeled_with_replacement ? take_with(sizes.n_unlabeled)
                                                         : take_without(sizes.n_unlabeled, "unlabeled objects");
  IndexList test = sizes.test_with_replacement ? take_with(sizes.n_test)
                                               : take_without(sizes.n_test, "test objects");
  return split_from_rows(ds, std::move(labeled), std::move(unlabeled), std::move(test));
}

inline SemiSplit sample_split(const Dataset& ds, Index n_labeled, Index n_unlabeled, Index n_test,
                              Seed seed, bool unlabeled_with_replacement,
                              bool test_with_replacement) {
  Rng rng(seed);
  return sample_split(ds,
                      SplitSizes{n_labeled, n_unlabeled, n_test, unlabeled_with_replacement,
                                 test_with_replacement},
                      rng);
}

/// Partitions {0, ..., n-1} into k folds after a seeded shuffle. The first
/// n mod k folds hold one extra element. Each fold is sorted.
inline std::vector<IndexList> kfold_indices(Index n, Index k, Seed seed) {
  if (k < 2 || n < k) throw PreconditionError("kfold_indices: need k >= 2 and n >= k");
  IndexList perm(n);
  for (Index i = 0; i < n; ++i) perm[i] = i;
  Rng rng(seed);
  rng.shuffle(perm);
  std::vector<IndexList> folds(k);
  for (Index i = 0; i < n; ++i) folds[i % k].push_back(perm[i]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

/// Z-scores every non-bias column using the mean and standard deviation of
/// the labeled and unlabeled rows together; the same transform is applied to
/// the test block. Zero-variance columns are only centered.
inline void standardize(SemiSplit& s) {
  const Matrix Xe = s.extended_design();
  const auto n = static_cast<double>(Xe.rows());
  for (Eigen::Index j = 1; j < Xe.cols(); ++j) {
    const double mean = Xe.col(j).mean();
    const double var = (Xe.col(j).array() - mean).square().sum() / n;
    const double scale = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
    for (Matrix* m : {&s.X, &s.X_u, &s.X_test}) {
      if (m->rows() == 0) continue;
      m->col(j) = (m->col(j).array() - mean) * scale;
    }
  }
}

} // namespace projls
