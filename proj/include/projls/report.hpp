#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "projls/csv.hpp"
#include "projls/error.hpp"

namespace projls {

/// One emitted measurement: (estimator, repeat, fold, unlabeled size, scope).
/// Losses are averaged per object; ratio is relative to the supervised fit on
/// the same rows.
struct ReportRow {
  std::string protocol;
  std::string dataset;
  std::string estimator;
  long repeat = 0;
  long fold = -1;
  long n_labeled = 0;
  long n_unlabeled = 0;
  std::string scope;
  double loss = 0.0;
  double error = 0.0;
  double ratio = 1.0;
  bool converged = true;
  double wall_time_ms = 0.0;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

enum class ReportFormat { Csv, Json };

inline constexpr std::string_view kReportColumns[] = {
    "protocol", "dataset", "estimator", "repeat", "fold",      "n_labeled",   "n_unlabeled",
    "scope",    "loss",    "error",     "ratio",  "converged", "wall_time_ms"};

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw ParseError("report: bad number '" + s + "'");
  return v;
}

inline long parse_long(const std::string& s) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) throw ParseError("report: bad integer '" + s + "'");
  return v;
}

inline void require_rows(const std::vector<ReportRow>& rows) {
  if (rows.empty()) throw PreconditionError("report: no rows to emit");
}

} // namespace detail

inline std::string report_to_csv(const std::vector<ReportRow>& rows) {
  detail::require_rows(rows);
  std::string out;
  for (std::size_t j = 0; j < std::size(kReportColumns); ++j) {
    if (j) out += ',';
    out += kReportColumns[j];
  }
  out += '\n';
  for (const auto& r : rows) {
    out += csv::quote(r.protocol) + ',' + csv::quote(r.dataset) + ',' + csv::quote(r.estimator) + ',' +
           std::to_string(r.repeat) + ',' + std::to_string(r.fold) + ',' + std::to_string(r.n_labeled) +
           ',' + std::to_string(r.n_unlabeled) + ',' + csv::quote(r.scope) + ',' +
           detail::format_double(r.loss) + ',' + detail::format_double(r.error) + ',' +
           detail::format_double(r.ratio) + ',' + (r.converged ? "true" : "false") + ',' +
           detail::format_double(r.wall_time_ms) + '\n';
  }
  return out;
}

inline std::string report_to_json(const std::vector<ReportRow>& rows) {
  detail::require_rows(rows);
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json o;
    o["protocol"] = r.protocol;
    o["dataset"] = r.dataset;
    o["estimator"] = r.estimator;
    o["repeat"] = r.repeat;
    o["fold"] = r.fold;
    o["n_labeled"] = r.n_labeled;
    o["n_unlabeled"] = r.n_unlabeled;
    o["scope"] = r.scope;
    o["loss"] = r.loss;
    o["error"] = r.error;
    o["ratio"] = r.ratio;
    o["converged"] = r.converged;
    o["wall_time_ms"] = r.wall_time_ms;
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + '\n';
}

inline std::vector<ReportRow> parse_report_csv(std::string_view text) {
  const auto records = csv::parse(text);
  if (records.empty()) throw ParseError("report: empty csv");
  const auto& header = records.front();
  if (header.size() != std::size(kReportColumns)) throw ParseError("report: unexpected header");
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] != kReportColumns[j]) throw ParseError("report: unexpected column " + header[j]);
  }
  std::vector<ReportRow> rows;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& f = records[i];
    if (f.size() != header.size()) throw ParseError("report: row " + std::to_string(i) + " has wrong width");
    ReportRow r;
    r.protocol = f[0];
    r.dataset = f[1];
    r.estimator = f[2];
    r.repeat = detail::parse_long(f[3]);
    r.fold = detail::parse_long(f[4]);
    r.n_labeled = detail::parse_long(f[5]);
    r.n_unlabeled = detail::parse_long(f[6]);
    r.scope = f[7];
    r.loss = detail::parse_double(f[8]);
    r.error = detail::parse_double(f[9]);
    r.ratio = detail::parse_double(f[10]);
    if (f[11] != "true" && f[11] != "false") throw ParseError("report: bad flag '" + f[11] + "'");
    r.converged = f[11] == "true";
    r.wall_time_ms = detail::parse_double(f[12]);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<ReportRow> parse_report_json(std::string_view text) {
  std::vector<ReportRow> rows;
  try {
    const auto arr = nlohmann::json::parse(text);
    for (const auto& o : arr) {
      ReportRow r;
      r.protocol = o.at("protocol").get<std::string>();
      r.dataset = o.at("dataset").get<std::string>();
      r.estimator = o.at("estimator").get<std::string>();
      r.repeat = o.at("repeat").get<long>();
      r.fold = o.at("fold").get<long>();
      r.n_labeled = o.at("n_labeled").get<long>();
      r.n_unlabeled = o.at("n_unlabeled").get<long>();
      r.scope = o.at("scope").get<std::string>();
      r.loss = o.at("loss").get<double>();
      r.error = o.at("error").get<double>();
      r.ratio = o.at("ratio").get<double>();
      r.converged = o.at("converged").get<bool>();
      r.wall_time_ms = o.at("wall_time_ms").get<double>();
      rows.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
  return rows;
}

inline std::string render_report(const std::vector<ReportRow>& rows, ReportFormat format) {
  return format == ReportFormat::Csv ? report_to_csv(rows) : report_to_json(rows);
}

inline void emit_report(const std::vector<ReportRow>& rows, ReportFormat format, const std::string& path) {
  const std::string text = render_report(rows, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write to " + path + " failed");
}

} // namespace projls
