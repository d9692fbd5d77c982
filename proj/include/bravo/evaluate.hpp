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

// End-to-end evaluation of a submission: file validation, frame-parallel
// accumulation into per-subset statistics, and aggregation.
//
// Frames are processed by a bounded pool of workers, each owning its own
// accumulators. Accumulators are integer monoids, so the merged statistics and
// therefore the report do not depend on thread count or frame order.

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <thread>
#include <vector>

#include "bravo/aggregate.hpp"
#include "bravo/core.hpp"
#include "bravo/error.hpp"
#include "bravo/manifest.hpp"
#include "bravo/metrics.hpp"
#include "bravo/pngio.hpp"

namespace bravo {

struct RunConfig {
  std::size_t ece_bins = 15;
  // 0 selects std::thread::hardware_concurrency().
  unsigned threads = 0;
  bool strict_validation = false;
  std::filesystem::path output_dir = ".";
  int track = 1;
};

// Thrown by evaluation when any frame fails validation.
class ValidationError : public Error {
 public:
  explicit ValidationError(ValidationReport report)
      : Error(ErrorCode::kValidationFailed,
              std::to_string(report.violations.size()) + " validation violation(s)"),
        report_(std::move(report)) {}

  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

struct LoadedFrame {
  ClassMap pred;
  ConfidenceMap conf;
  GroundTruthFrame gt;
};

namespace detail {

inline Rule rule_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotPng: return Rule::kNotPng;
    case ErrorCode::kWrongBitDepth: return Rule::kWrongBitDepth;
    case ErrorCode::kWrongChannelCount: return Rule::kWrongChannelCount;
    default: return Rule::kCorruptFile;
  }
}

template <typename Map, typename Reader>
std::optional<Map> load_checked(const ManifestEntry& e, const std::filesystem::path& path,
                                const char* role, Reader read, ValidationReport& report) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    report.violations.push_back({e.frame_id, Rule::kMissingFile,
                                 std::string(role) + " file not found: " + path.generic_string(),
                                 std::nullopt, 0});
    return std::nullopt;
  }
  try {
    return read(path);
  } catch (const Error& err) {
    std::optional<long long> value;
    if (err.code() == ErrorCode::kWrongBitDepth) {
      try {
        value = read_png_header(path).bit_depth;
      } catch (const Error&) {
      }
    }
    report.violations.push_back({e.frame_id, rule_for(err.code()),
                                 std::string(role) + " file: " + err.what(), value, 0});
    return std::nullopt;
  }
}

}  // namespace detail

// Reads the three files of one entry and validates them. `frame` is filled
// only when the entry is clean.
inline ValidationReport load_and_validate(const ManifestEntry& e,
                                          std::optional<LoadedFrame>* frame = nullptr) {
  ValidationReport report;
  auto pred = detail::load_checked<ClassMap>(
      e, e.pred_path, "prediction", [](const auto& p) { return read_class_png(p); }, report);
  auto conf = detail::load_checked<ConfidenceMap>(
      e, e.conf_path, "confidence", [](const auto& p) { return read_conf_png(p); }, report);
  auto gt = detail::load_checked<GroundTruthFrame>(
      e, e.gt_path, "ground-truth", [](const auto& p) { return read_gt_png(p); }, report);
  if (pred && conf && gt) {
    report.merge(validate_pair(*pred, *conf, *gt, e.frame_id));
    if (report.ok() && frame != nullptr) {
      *frame = LoadedFrame{std::move(*pred), std::move(*conf), std::move(*gt)};
    }
  }
  return report;
}

// Machine-readable violation listing. Field names are part of the external
// interface of `validate`.
inline ReportJson to_json(const ValidationReport& report) {
  ReportJson list = ReportJson::array();
  for (const auto& v : report.violations) {
    ReportJson item{{"frame", v.frame}, {"rule", std::string(to_string(v.rule))}, {"detail", v.detail}};
    item["value"] = v.value ? ReportJson(*v.value) : ReportJson(nullptr);
    item["count"] = v.count;
    list.push_back(std::move(item));
  }
  return ReportJson{{"ok", report.ok()}, {"violations", std::move(list)}};
}

inline unsigned resolve_threads(unsigned requested, std::size_t jobs) {
  unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, jobs)));
}

// Runs `job(worker, index)` for every index in [0, count) on a bounded pool.
// The first exception thrown by any job is rethrown after all workers stop.
template <typename Job>
void parallel_for(std::size_t count, unsigned threads, Job&& job) {
  const unsigned workers = resolve_threads(threads, count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < count && !failed; i = next++) job(w, i);
        } catch (...) {
          errors[w] = std::current_exception();
          failed = true;
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline ValidationReport validate_submission(const SubmissionManifest& manifest,
                                            unsigned threads = 0) {
  SubmissionManifest sorted = manifest;
  sort_entries(sorted.entries);
  ValidationReport report = check_manifest(sorted);
  std::vector<ValidationReport> per_entry(sorted.entries.size());
  parallel_for(sorted.entries.size(), threads,
               [&](unsigned, std::size_t i) { per_entry[i] = load_and_validate(sorted.entries[i]); });
  for (const auto& r : per_entry) report.merge(r);
  return report;
}

struct SubsetAccumulation {
  explicit SubsetAccumulation(std::size_t ece_bins = 15) : semantic(ece_bins) {}

  std::size_t frames = 0;
  SemanticAccumulator semantic;
  ScoreHistogram ood;

  SubsetAccumulation& merge(const SubsetAccumulation& other) {
    frames += other.frames;
    semantic.merge(other.semantic);
    ood.merge(other.ood);
    return *this;
  }

  friend bool operator==(const SubsetAccumulation&, const SubsetAccumulation&) = default;
};

inline void accumulate_frame(SubsetAccumulation& acc, Subset subset, const LoadedFrame& f) {
  ++acc.frames;
  if (semantic_eval(subset)) {
    accumulate_semantic(acc.semantic, f.pred, f.conf, f.gt,
                        pixel_roles(f.gt, subset, EvalMode::kSemantic));
  }
  if (ood_eval(subset)) {
    accumulate_ood(acc.ood, f.conf, pixel_roles(f.gt, subset, EvalMode::kOod));
  }
}

using SubmissionAccumulation = std::map<Subset, SubsetAccumulation>;

// Loads, validates and accumulates every frame. Throws ValidationError
// listing every violation (in canonical frame order) if any frame is bad.
inline SubmissionAccumulation accumulate_submission(const SubmissionManifest& manifest,
                                                    const RunConfig& config) {
  SubmissionManifest sorted = manifest;
  sort_entries(sorted.entries);
  ValidationReport structural = check_manifest(sorted);
  if (!structural.ok()) throw ValidationError(structural);

  const unsigned workers = resolve_threads(config.threads, sorted.entries.size());
  std::vector<SubmissionAccumulation> partial(workers);
  std::vector<ValidationReport> problems(sorted.entries.size());
  parallel_for(sorted.entries.size(), workers, [&](unsigned w, std::size_t i) {
    const ManifestEntry& e = sorted.entries[i];
    std::optional<LoadedFrame> frame;
    problems[i] = load_and_validate(e, &frame);
    if (!frame) return;
    auto it = partial[w].try_emplace(e.subset, config.ece_bins).first;
    accumulate_frame(it->second, e.subset, *frame);
  });

  ValidationReport report;
  for (const auto& p : problems) report.merge(p);
  if (!report.ok()) throw ValidationError(report);

  SubmissionAccumulation total;
  for (const auto& worker : partial) {
    for (const auto& [subset, acc] : worker) {
      total.try_emplace(subset, config.ece_bins).first->second.merge(acc);
    }
  }
  return total;
}

inline AggregateReport evaluate_accumulation(const SubmissionAccumulation& acc,
                                             const std::string& submission_id,
                                             const RunConfig& config) {
  std::vector<SubsetResult> results;
  for (const auto& [subset, a] : acc) {
    results.push_back(subset_result(subset, a.semantic, a.ood, a.frames));
  }
  AggregateReport report = aggregate_submission(std::move(results));
  report.submission_id = submission_id;
  report.track = config.track;
  report.ece_bins = config.ece_bins;
  return report;
}

inline AggregateReport evaluate_submission(const SubmissionManifest& manifest,
                                           const RunConfig& config) {
  return evaluate_accumulation(accumulate_submission(manifest, config), manifest.submission_id,
                               config);
}

}  // namespace bravo
