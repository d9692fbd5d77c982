/* Copyright 2026 The BRAVO Evaluation Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

// Per-subset metric tables, cross-subset means, harmonic-mean aggregates and
// the leaderboard ordering.
//
// Aggregation order: per-subset metrics -> arithmetic mean of each metric over
// the subsets where it applies -> reversal of lower-is-better metrics (1 - x)
// -> harmonic mean across metrics. The BRAVO Index is the harmonic mean of the
// semantic and OOD aggregates.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bravo/core.hpp"
#include "bravo/error.hpp"
#include "bravo/metrics.hpp"

namespace bravo {

struct SemanticMetrics {
  double miou = 0.0;
  double ece = 0.0;
  double auroc = 0.0;
  double fpr95 = 0.0;
  double aupr_success = 0.0;
  double aupr_error = 0.0;

  friend bool operator==(const SemanticMetrics&, const SemanticMetrics&) = default;
};

struct OodMetrics {
  double auroc = 0.0;
  double fpr95 = 0.0;
  double auprc = 0.0;

  friend bool operator==(const OodMetrics&, const OodMetrics&) = default;
};

struct SubsetResult {
  Subset subset = Subset::kAcdc;
  std::optional<SemanticMetrics> semantic;
  std::optional<OodMetrics> ood;
  // Harmonic mean of every applicable metric of this subset, reversals applied.
  double summary = 0.0;
  std::size_t frames = 0;
  Count semantic_pixels = 0;
  Count ood_pixels = 0;

  friend bool operator==(const SubsetResult&, const SubsetResult&) = default;
};

struct AggregateReport {
  std::string submission_id;
  int track = 1;
  std::size_t ece_bins = 15;
  std::vector<SubsetResult> per_subset;
  SemanticMetrics semantic_mean;
  OodMetrics ood_mean;
  double semantic_agg = 0.0;
  double ood_agg = 0.0;
  double bravo_index = 0.0;

  friend bool operator==(const AggregateReport&, const AggregateReport&) = default;
};

// n / sum(1/v). Zero when any value is zero. Values are summed in ascending
// order so the result does not depend on input order.
inline double harmonic_mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kEmptyList, "harmonic mean of no values");
  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kOutOfRange, "harmonic mean input " + std::to_string(v) +
                                              " is outside [0, 1]");
    }
  }
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == 0.0) return 0.0;
  if (sorted.front() == sorted.back()) return sorted.front();
  double inverse_sum = 0.0;
  for (double v : sorted) inverse_sum += 1.0 / v;
  return static_cast<double>(sorted.size()) / inverse_sum;
}

inline double harmonic_mean(std::initializer_list<double> values) {
  return harmonic_mean(std::span<const double>(values.begin(), values.size()));
}

// Higher-is-better view of the six semantic metrics.
inline std::array<double, 6> semantic_terms(const SemanticMetrics& m) {
  return {m.miou, 1.0 - m.ece, m.auroc, 1.0 - m.fpr95, m.aupr_success, m.aupr_error};
}

inline std::array<double, 3> ood_terms(const OodMetrics& m) {
  return {m.auroc, 1.0 - m.fpr95, m.auprc};
}

inline double semantic_aggregate(const SemanticMetrics& m) {
  const auto terms = semantic_terms(m);
  return harmonic_mean(terms);
}

inline double ood_aggregate(const OodMetrics& m) {
  const auto terms = ood_terms(m);
  return harmonic_mean(terms);
}

inline double subset_summary(const std::optional<SemanticMetrics>& semantic,
                             const std::optional<OodMetrics>& ood) {
  std::vector<double> terms;
  if (semantic) {
    const auto t = semantic_terms(*semantic);
    terms.insert(terms.end(), t.begin(), t.end());
  }
  if (ood) {
    const auto t = ood_terms(*ood);
    terms.insert(terms.end(), t.begin(), t.end());
  }
  return harmonic_mean(terms);
}

namespace detail {

template <typename F>
double subset_metric(Subset subset, const char* name, F&& compute) {
  try {
    return compute();
  } catch (const Error& e) {
    throw Error(ErrorCode::kDegenerateSubset,
                std::string(subset_id(subset)) + " " + name + ": " + e.what());
  }
}

}  // namespace detail

inline SemanticMetrics semantic_metrics(Subset subset, const SemanticAccumulator& acc) {
  SemanticMetrics m;
  m.miou = detail::subset_metric(subset, "mIoU", [&] { return miou(acc.confusion); });
  m.ece = detail::subset_metric(subset, "ECE", [&] { return ece(acc.calibration); });
  m.auroc = detail::subset_metric(subset, "AUROC", [&] { return auroc(acc.correctness); });
  m.fpr95 =
      detail::subset_metric(subset, "FPR@95", [&] { return fpr_at_95tpr(acc.correctness); });
  m.aupr_success =
      detail::subset_metric(subset, "AUPR-Success", [&] { return aupr(acc.correctness); });
  m.aupr_error =
      detail::subset_metric(subset, "AUPR-Error", [&] { return aupr_error(acc.correctness); });
  return m;
}

inline OodMetrics ood_metrics(Subset subset, const ScoreHistogram& hist) {
  OodMetrics m;
  m.auroc = detail::subset_metric(subset, "OOD AUROC", [&] { return auroc(hist); });
  m.fpr95 = detail::subset_metric(subset, "OOD FPR@95", [&] { return fpr_at_95tpr(hist); });
  m.auprc = detail::subset_metric(subset, "OOD AUPRC", [&] { return aupr(hist); });
  return m;
}

// Metrics of one subset from its pooled accumulators. Throws DegenerateSubset
// naming the subset and the metric when a population is degenerate.
inline SubsetResult subset_result(Subset subset, const SemanticAccumulator& semantic,
                                  const ScoreHistogram& ood, std::size_t frames = 0) {
  SubsetResult r;
  r.subset = subset;
  r.frames = frames;
  r.semantic_pixels = semantic.pixels();
  r.ood_pixels = ood.total();
  if (semantic_eval(subset)) r.semantic = semantic_metrics(subset, semantic);
  if (ood_eval(subset)) r.ood = ood_metrics(subset, ood);
  r.summary = subset_summary(r.semantic, r.ood);
  return r;
}

inline AggregateReport aggregate_submission(std::vector<SubsetResult> per_subset) {
  std::map<Subset, const SubsetResult*> by_subset;
  for (const auto& r : per_subset) {
    if (!by_subset.emplace(r.subset, &r).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "subset " + std::string(subset_id(r.subset)) + " listed twice");
    }
  }
  std::string missing;
  for (Subset s : kAllSubsets) {
    if (by_subset.count(s) == 0) missing += (missing.empty() ? "" : ", ") + std::string(subset_id(s));
  }
  if (!missing.empty()) throw Error(ErrorCode::kMissingSubset, "no result for " + missing);

  AggregateReport report;
  int semantic_count = 0, ood_count = 0;
  for (const auto& [subset, r] : by_subset) {
    if (semantic_eval(subset)) {
      if (!r->semantic) {
        throw Error(ErrorCode::kDegenerateSubset,
                    std::string(subset_id(subset)) + " has no semantic metrics");
      }
      const SemanticMetrics& m = *r->semantic;
      report.semantic_mean.miou += m.miou;
      report.semantic_mean.ece += m.ece;
      report.semantic_mean.auroc += m.auroc;
      report.semantic_mean.fpr95 += m.fpr95;
      report.semantic_mean.aupr_success += m.aupr_success;
      report.semantic_mean.aupr_error += m.aupr_error;
      ++semantic_count;
    }
    if (ood_eval(subset)) {
      if (!r->ood) {
        throw Error(ErrorCode::kDegenerateSubset,
                    std::string(subset_id(subset)) + " has no OOD metrics");
      }
      report.ood_mean.auroc += r->ood->auroc;
      report.ood_mean.fpr95 += r->ood->fpr95;
      report.ood_mean.auprc += r->ood->auprc;
      ++ood_count;
    }
  }
  auto& sm = report.semantic_mean;
  for (double* f : {&sm.miou, &sm.ece, &sm.auroc, &sm.fpr95, &sm.aupr_success, &sm.aupr_error}) {
    *f /= semantic_count;
  }
  auto& om = report.ood_mean;
  for (double* f : {&om.auroc, &om.fpr95, &om.auprc}) *f /= ood_count;

  report.semantic_agg = semantic_aggregate(report.semantic_mean);
  report.ood_agg = ood_aggregate(report.ood_mean);
  report.bravo_index = harmonic_mean({report.semantic_agg, report.ood_agg});

  std::sort(per_subset.begin(), per_subset.end(),
            [](const auto& a, const auto& b) { return a.subset < b.subset; });
  report.per_subset = std::move(per_subset);
  return report;
}

// ---------------------------------------------------------------------------
// Leaderboard

struct LeaderboardRow {
  int position = 0;
  std::string submission_id;
  int track = 1;
  double bravo_index = 0.0;
  double semantic_agg = 0.0;
  double ood_agg = 0.0;
};

// Descending BRAVO Index; ties fall back to the semantic aggregate, then the
// OOD aggregate, then the submission id.
inline std::vector<LeaderboardRow> rank(std::span<const AggregateReport> reports) {
  std::vector<LeaderboardRow> rows;
  rows.reserve(reports.size());
  for (const auto& r : reports) {
    rows.push_back({0, r.submission_id, r.track, r.bravo_index, r.semantic_agg, r.ood_agg});
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.bravo_index != b.bravo_index) return a.bravo_index > b.bravo_index;
    if (a.semantic_agg != b.semantic_agg) return a.semantic_agg > b.semantic_agg;
    if (a.ood_agg != b.ood_agg) return a.ood_agg > b.ood_agg;
    return a.submission_id < b.submission_id;
  });
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].position = static_cast<int>(i + 1);
  return rows;
}

// ---------------------------------------------------------------------------
// Report files. Field names are part of the external interface.

using ReportJson = nlohmann::ordered_json;

inline ReportJson to_json(const SemanticMetrics& m) {
  return ReportJson{{"miou", m.miou},   {"ece", m.ece},
                    {"auroc", m.auroc}, {"fpr95", m.fpr95},
                    {"aupr_success", m.aupr_success}, {"aupr_error", m.aupr_error}};
}

inline ReportJson to_json(const OodMetrics& m) {
  return ReportJson{{"auroc", m.auroc}, {"fpr95", m.fpr95}, {"auprc", m.auprc}};
}

inline ReportJson to_json(const AggregateReport& r) {
  ReportJson subsets = ReportJson::array();
  for (const auto& s : r.per_subset) {
    subsets.push_back(ReportJson{
        {"subset", subset_id(s.subset)},
        {"frames", s.frames},
        {"semantic_pixels", s.semantic_pixels},
        {"ood_pixels", s.ood_pixels},
        {"semantic", s.semantic ? to_json(*s.semantic) : ReportJson(nullptr)},
        {"ood", s.ood ? to_json(*s.ood) : ReportJson(nullptr)},
        {"summary", s.summary}});
  }
  return ReportJson{{"format", "bravo-report/1"},
                    {"submission_id", r.submission_id},
                    {"track", r.track},
                    {"ece_bins", r.ece_bins},
                    {"subsets", subsets},
                    {"semantic_mean", to_json(r.semantic_mean)},
                    {"ood_mean", to_json(r.ood_mean)},
                    {"semantic", r.semantic_agg},
                    {"ood", r.ood_agg},
                    {"bravo_index", r.bravo_index}};
}

inline SemanticMetrics semantic_from_json(const ReportJson& j) {
  return {j.at("miou").get<double>(),  j.at("ece").get<double>(),
          j.at("auroc").get<double>(), j.at("fpr95").get<double>(),
          j.at("aupr_success").get<double>(), j.at("aupr_error").get<double>()};
}

inline OodMetrics ood_from_json(const ReportJson& j) {
  return {j.at("auroc").get<double>(), j.at("fpr95").get<double>(),
          j.at("auprc").get<double>()};
}

inline AggregateReport report_from_json(const ReportJson& j) {
  try {
    AggregateReport r;
    r.submission_id = j.at("submission_id").get<std::string>();
    r.track = j.value("track", 1);
    r.ece_bins = j.value("ece_bins", std::size_t{15});
    for (const auto& s : j.at("subsets")) {
      SubsetResult sr;
      const auto subset = parse_subset(s.at("subset").get<std::string>());
      if (!subset) throw Error(ErrorCode::kInvalidArgument, "unknown subset in report");
      sr.subset = *subset;
      sr.frames = s.value("frames", std::size_t{0});
      sr.semantic_pixels = s.value("semantic_pixels", Count{0});
      sr.ood_pixels = s.value("ood_pixels", Count{0});
      if (!s.at("semantic").is_null()) sr.semantic = semantic_from_json(s.at("semantic"));
      if (!s.at("ood").is_null()) sr.ood = ood_from_json(s.at("ood"));
      sr.summary = s.at("summary").get<double>();
      r.per_subset.push_back(sr);
    }
    r.semantic_mean = semantic_from_json(j.at("semantic_mean"));
    r.ood_mean = ood_from_json(j.at("ood_mean"));
    r.semantic_agg = j.at("semantic").get<double>();
    r.ood_agg = j.at("ood").get<double>();
    r.bravo_index = j.at("bravo_index").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed report: ") + e.what());
  }
}

inline std::string serialize_report(const AggregateReport& r) {
  return to_json(r).dump(2) + "\n";
}

inline void write_report(const std::filesystem::path& path, const AggregateReport& r) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot create " + path.string());
  out << serialize_report(r);
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed for " + path.string());
}

inline AggregateReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open report " + path.string());
  ReportJson j;
  try {
    j = ReportJson::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, path.string() + ": " + e.what());
  }
  return report_from_json(j);
}

// ---------------------------------------------------------------------------
// Plain-text rendering: ratios shown x100 with one decimal.

inline std::string percent(double ratio) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", ratio * 100.0);
  return buf;
}

inline std::string render_report_table(const AggregateReport& r) {
  std::ostringstream out;
  char line[256];
  out << "submission: " << r.submission_id << " (track " << r.track << ", ECE bins "
      << r.ece_bins << ")\n\n";
  std::snprintf(line, sizeof line, "%-13s %6s %6s %6s %6s %7s %7s | %6s %6s %6s | %7s\n",
                "subset", "mIoU", "ECE", "AUROC", "FPR95", "AUPR-S", "AUPR-E", "AUROC",
                "FPR95", "AUPRC", "summary");
  out << line;
  auto cell = [](const std::optional<double>& v) { return v ? percent(*v) : std::string("-"); };
  for (const auto& s : r.per_subset) {
    std::optional<double> sem[6], ood[3];
    if (s.semantic) {
      const auto& m = *s.semantic;
      const double vals[6] = {m.miou, m.ece, m.auroc, m.fpr95, m.aupr_success, m.aupr_error};
      for (int i = 0; i < 6; ++i) sem[i] = vals[i];
    }
    if (s.ood) {
      const double vals[3] = {s.ood->auroc, s.ood->fpr95, s.ood->auprc};
      for (int i = 0; i < 3; ++i) ood[i] = vals[i];
    }
    std::snprintf(line, sizeof line, "%-13s %6s %6s %6s %6s %7s %7s | %6s %6s %6s | %7s\n",
                  std::string(subset_display_name(s.subset)).c_str(), cell(sem[0]).c_str(),
                  cell(sem[1]).c_str(), cell(sem[2]).c_str(), cell(sem[3]).c_str(),
                  cell(sem[4]).c_str(), cell(sem[5]).c_str(), cell(ood[0]).c_str(),
                  cell(ood[1]).c_str(), cell(ood[2]).c_str(), percent(s.summary).c_str());
    out << line;
  }
  const auto& m = r.semantic_mean;
  std::snprintf(line, sizeof line, "%-13s %6s %6s %6s %6s %7s %7s | %6s %6s %6s |\n", "mean",
                percent(m.miou).c_str(), percent(m.ece).c_str(), percent(m.auroc).c_str(),
                percent(m.fpr95).c_str(), percent(m.aupr_success).c_str(),
                percent(m.aupr_error).c_str(), percent(r.ood_mean.auroc).c_str(),
                percent(r.ood_mean.fpr95).c_str(), percent(r.ood_mean.auprc).c_str());
  out << line << "\n";
  out << "Semantic " << percent(r.semantic_agg) << "  OOD " << percent(r.ood_agg)
      << "  BRAVO " << percent(r.bravo_index) << "\n";
  return out.str();
}

inline std::string render_leaderboard(std::span<const LeaderboardRow> rows) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-4s %-32s %5s %7s %9s %6s\n", "#", "submission",
                "track", "BRAVO", "Semantic", "OOD");
  out << line;
  for (const auto& row : rows) {
    std::snprintf(line, sizeof line, "%-4d %-32s %5d %7s %9s %6s\n", row.position,
                  row.submission_id.c_str(), row.track, percent(row.bravo_index).c_str(),
                  percent(row.semantic_agg).c_str(), percent(row.ood_agg).c_str());
    out << line;
  }
  return out.str();
}

}  // namespace bravo
