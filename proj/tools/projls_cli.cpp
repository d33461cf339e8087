// Command line front end: single fits and the three experiment protocols.
//
//   projls fit --data d.csv --label-col class --estimator projection --out w.json
//   projls experiment loss-ratio --data d.csv --label-col class --out r.csv
//   projls experiment learning-curve ...
//   projls experiment cross-validate ...
//
// Exit codes: 0 success, 2 bad arguments, 3 data error, 4 numerical error.

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "projls/projls.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitArgs = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct CommonOptions {
  std::string data;
  std::string label_col;
  std::string out;
  std::string format;
  std::string name;
  std::string estimators;
  double lambda = 0.0;
  bool penalize_bias = false;
  std::uint64_t seed = 1;
  std::size_t repeats = 0;
  bool standardize = false;
  bool no_timing = false;
  std::size_t threads = 1;
};

void add_common(CLI::App* cmd, CommonOptions& o, const std::string& default_estimators) {
  cmd->add_option("--data", o.data, "CSV file with a header row")->required();
  cmd->add_option("--label-col", o.label_col, "Name of the binary label column")->required();
  cmd->add_option("--out", o.out, "Report path")->required();
  cmd->add_option("--format", o.format, "csv or json (default: from the --out extension)")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--name", o.name, "Dataset name written to the report (default: file stem)");
  o.estimators = default_estimators;
  cmd->add_option("--estimators", o.estimators, "Comma list of estimators")->capture_default_str();
  cmd->add_option("--lambda", o.lambda, "Ridge penalty for the supervised fit")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_flag("--penalize-bias", o.penalize_bias, "Apply the ridge penalty to the bias weight too");
  cmd->add_option("--seed", o.seed, "Base seed; repeat r uses seed + r")->capture_default_str();
  cmd->add_flag("--standardize", o.standardize, "Z-score features with labeled + unlabeled statistics");
  cmd->add_flag("--no-timing", o.no_timing, "Write 0 for wall times (byte-reproducible reports)");
  cmd->add_option("--threads", o.threads, "Worker threads for repeats")->check(CLI::PositiveNumber);
}

projls::ReportFormat resolve_format(const CommonOptions& o) {
  if (o.format == "json") return projls::ReportFormat::Json;
  if (o.format == "csv") return projls::ReportFormat::Csv;
  return std::filesystem::path(o.out).extension() == ".json" ? projls::ReportFormat::Json
                                                             : projls::ReportFormat::Csv;
}

projls::ExperimentConfig base_config(const CommonOptions& o, const projls::Dataset&) {
  projls::ExperimentConfig cfg;
  cfg.estimators = projls::parse_estimator_list(o.estimators);
  cfg.seed = projls::Seed{o.seed};
  cfg.ridge = {o.lambda, o.penalize_bias};
  cfg.dataset_name = o.name.empty() ? std::filesystem::path(o.data).stem().string() : o.name;
  cfg.standardize = o.standardize;
  cfg.record_wall_time = !o.no_timing;
  cfg.threads = o.threads;
  return cfg;
}

std::vector<std::size_t> parse_sizes(const std::string& list) {
  std::vector<std::size_t> sizes;
  std::string item;
  std::istringstream in(list);
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    const long long v = std::stoll(item, &pos);
    if (pos != item.size() || v <= 0) throw projls::PreconditionError("bad size '" + item + "'");
    sizes.push_back(static_cast<std::size_t>(v));
  }
  if (sizes.empty()) throw projls::PreconditionError("--sizes is empty");
  return sizes;
}

int finish_experiment(const projls::ExperimentReport& report, const CommonOptions& o) {
  for (const auto& s : report.skipped) {
    std::cerr << "skipped: repeat " << s.repeat;
    if (s.fold >= 0) std::cerr << " fold " << s.fold;
    std::cerr << " n_unlabeled " << s.n_unlabeled;
    if (!s.estimator.empty()) std::cerr << " estimator " << s.estimator;
    std::cerr << ": " << s.reason << '\n';
  }
  if (report.rows.empty()) {
    std::cerr << "error: all " << report.trials << " trials failed\n";
    return kExitNumeric;
  }
  projls::emit_report(report.rows, resolve_format(o), o.out);
  std::cerr << report.rows.size() << " rows written to " << o.out << " (" << report.skipped.size()
            << " skipped)\n";
  const auto bad = projls::nondegradation_violations(report.rows);
  if (!bad.empty()) {
    std::cerr << "error: " << bad.size()
              << " converged projection rows have train_all loss ratio above 1 + 1e-9\n";
    return kExitNumeric;
  }
  return kExitOk;
}

int run_fit(const CommonOptions& o, const std::string& estimator, std::size_t n_labeled, bool n_labeled_set) {
  const projls::Dataset ds = projls::prepare_dataset(o.data, o.label_col);
  const projls::Estimator est = projls::parse_estimator(estimator);
  const std::size_t n_lab = n_labeled_set ? n_labeled : 2 * ds.dims();
  if (n_lab > ds.rows()) throw projls::InsufficientRows("--n-labeled exceeds the number of rows");
  projls::SemiSplit split =
      projls::sample_split(ds, n_lab, ds.rows() - n_lab, 0, projls::Seed{o.seed}, false, false);
  if (o.standardize) projls::standardize(split);

  projls::ExperimentConfig cfg = base_config(o, ds);
  const projls::FitOutcome fit = projls::detail::fit_estimator(est, split, cfg);

  nlohmann::ordered_json j;
  j["estimator"] = std::string(projls::to_string(est));
  j["dataset"] = cfg.dataset_name;
  j["lambda"] = o.lambda;
  j["penalize_bias"] = o.penalize_bias;
  j["seed"] = o.seed;
  j["n_labeled"] = split.n_labeled();
  j["n_unlabeled"] = split.n_unlabeled();
  std::vector<std::string> names{"bias"};
  names.insert(names.end(), ds.feature_names.begin(), ds.feature_names.end());
  j["feature_names"] = names;
  j["class_names"] = ds.class_names;
  j["weights"] = std::vector<double>(fit.w.data(), fit.w.data() + fit.w.size());
  j["converged"] = fit.converged;
  j["labeled_error"] = projls::error_rate(fit.w, split.X, split.y);
  j["needs_update"] = projls::needs_update(projls::fit_supervised(split.X, split.y, cfg.ridge), split.X_u);

  std::ofstream out(o.out, std::ios::trunc);
  if (!out) throw projls::IoError("cannot open " + o.out + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw projls::IoError("write to " + o.out + " failed");
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projected semi-supervised least squares classification"};
  app.require_subcommand(1);

  CommonOptions fit_opts;
  std::string fit_estimator = "projection";
  std::size_t fit_labeled = 0;
  auto* fit = app.add_subcommand("fit", "Fit one estimator on a seeded labeled/unlabeled split");
  add_common(fit, fit_opts, "projection");
  fit->add_option("--estimator", fit_estimator, "Estimator name")->capture_default_str();
  auto* fit_labeled_opt = fit->add_option("--n-labeled", fit_labeled, "Labeled objects (default 2d)");

  auto* experiment = app.add_subcommand("experiment", "Run an experiment protocol");
  experiment->require_subcommand(1);

  CommonOptions lr_opts;
  std::size_t lr_unlabeled = 1000;
  std::size_t lr_test = 1000;
  lr_opts.repeats = 100;
  auto* lr = experiment->add_subcommand("loss-ratio", "Loss ratio on training and test data");
  add_common(lr, lr_opts, "supervised,self_learning,projection");
  lr->add_option("--repeats", lr_opts.repeats)->check(CLI::PositiveNumber)->capture_default_str();
  lr->add_option("--n-unlabeled", lr_unlabeled)->capture_default_str();
  lr->add_option("--n-test", lr_test)->capture_default_str();

  CommonOptions lc_opts;
  std::string lc_sizes = "2,4,8,16,32,64,128,256,512";
  lc_opts.repeats = 100;
  auto* lc = experiment->add_subcommand("learning-curve", "Test loss and error versus unlabeled size");
  add_common(lc, lc_opts, "supervised,self_learning,projection,icls");
  lc->add_option("--sizes", lc_sizes, "Comma list of unlabeled sizes")->capture_default_str();
  lc->add_option("--repeats", lc_opts.repeats)->check(CLI::PositiveNumber)->capture_default_str();
  std::string lc_summary;
  lc->add_option("--summary", lc_summary, "Also write mean and standard error per size (CSV)");

  CommonOptions cv_opts;
  std::size_t cv_folds = 10;
  std::size_t cv_labeled = 0;
  cv_opts.repeats = 20;
  auto* cv = experiment->add_subcommand("cross-validate", "Repeated k-fold cross-validation error");
  add_common(cv, cv_opts, "supervised,self_learning,icls,projection");
  cv->add_option("--folds", cv_folds)->check(CLI::Range(2, 1000000))->capture_default_str();
  cv->add_option("--repeats", cv_opts.repeats)->check(CLI::PositiveNumber)->capture_default_str();
  auto* cv_labeled_opt = cv->add_option("--labeled", cv_labeled, "Labeled objects per fold (default d+5)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitArgs;
  }

  try {
    if (*fit) return run_fit(fit_opts, fit_estimator, fit_labeled, fit_labeled_opt->count() > 0);

    if (*lr) {
      const auto ds = projls::prepare_dataset(lr_opts.data, lr_opts.label_col);
      auto cfg = base_config(lr_opts, ds);
      cfg.n_repeats = lr_opts.repeats;
      cfg.n_unlabeled = lr_unlabeled;
      cfg.n_test = lr_test;
      return finish_experiment(projls::run_loss_ratio(ds, cfg), lr_opts);
    }
    if (*lc) {
      const auto ds = projls::prepare_dataset(lc_opts.data, lc_opts.label_col);
      auto cfg = base_config(lc_opts, ds);
      cfg.n_repeats = lc_opts.repeats;
      cfg.curve_sizes = parse_sizes(lc_sizes);
      const auto report = projls::run_learning_curve(ds, cfg);
      const int code = finish_experiment(report, lc_opts);
      if (!lc_summary.empty() && !report.rows.empty()) {
        std::ofstream out(lc_summary, std::ios::trunc);
        if (!out) throw projls::IoError("cannot open " + lc_summary);
        out << "estimator,n_unlabeled,scope,count,mean_loss,se_loss,mean_error,se_error\n";
        for (const auto& s : projls::summarize(report.rows)) {
          out << s.estimator << ',' << s.n_unlabeled << ',' << s.scope << ',' << s.count << ','
              << projls::detail::format_double(s.mean_loss) << ',' << projls::detail::format_double(s.se_loss)
              << ',' << projls::detail::format_double(s.mean_error) << ','
              << projls::detail::format_double(s.se_error) << '\n';
        }
      }
      return code;
    }
    if (*cv) {
      const auto ds = projls::prepare_dataset(cv_opts.data, cv_opts.label_col);
      auto cfg = base_config(cv_opts, ds);
      cfg.n_repeats = cv_opts.repeats;
      cfg.folds = cv_folds;
      if (cv_labeled_opt->count() > 0) cfg.cv_labeled = cv_labeled;
      return finish_experiment(projls::run_cross_validation(ds, cfg), cv_opts);
    }
  } catch (const projls::PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitArgs;
  } catch (const projls::NotPositiveDefinite& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const projls::Error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitArgs;
  }
  return kExitArgs;
}
