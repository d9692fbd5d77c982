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

// Submission manifests and directory discovery.
//
// Manifest text format: `key: value` lines grouped into records separated by
// blank lines; `#` starts a comment line. The first record carries
// `submission_id`, every following record describes one frame with the keys
// `frame_id`, `subset`, `pred`, `conf` and `gt`. Relative paths are resolved
// against the directory containing the manifest.
//
// Directory layout: `<root>/<subset>/<frame_id>_pred.png` and
// `<frame_id>_conf.png`; ground truth lives at
// `<gt_root>/<subset>/<frame_id>_gt.png` (gt_root defaults to root).

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "bravo/core.hpp"
#include "bravo/error.hpp"

namespace bravo {

namespace fs = std::filesystem;

struct ManifestEntry {
  std::string frame_id;
  Subset subset;
  fs::path pred_path;
  fs::path conf_path;
  fs::path gt_path;
};

struct SubmissionManifest {
  std::string submission_id;
  std::vector<ManifestEntry> entries;
};

inline constexpr std::string_view kPredSuffix = "_pred.png";
inline constexpr std::string_view kConfSuffix = "_conf.png";
inline constexpr std::string_view kGtSuffix = "_gt.png";

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace detail

// Canonical ordering: subset taxonomy order, then frame id.
inline void sort_entries(std::vector<ManifestEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return std::tie(a.subset, a.frame_id) < std::tie(b.subset, b.frame_id);
  });
}

inline SubmissionManifest parse_manifest(std::istream& in, const fs::path& base_dir) {
  SubmissionManifest manifest;
  std::vector<std::map<std::string, std::pair<std::string, int>>> records(1);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = detail::trim(line);
    if (text.empty()) {
      if (!records.back().empty()) records.emplace_back();
      continue;
    }
    if (text.front() == '#') continue;
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument,
                  "manifest line " + std::to_string(line_no) + ": expected 'key: value'");
    }
    const std::string key = detail::trim(std::string_view(text).substr(0, colon));
    const std::string value = detail::trim(std::string_view(text).substr(colon + 1));
    if (!records.back().emplace(key, std::make_pair(value, line_no)).second) {
      throw Error(ErrorCode::kInvalidArgument, "manifest line " + std::to_string(line_no) +
                                                   ": duplicate key '" + key + "'");
    }
  }
  if (records.back().empty()) records.pop_back();

  auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  for (const auto& record : records) {
    auto field = [&](const std::string& key) -> const std::string& {
      const auto it = record.find(key);
      if (it == record.end()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "manifest record near line " +
                        std::to_string(record.begin()->second.second) +
                        " lacks key '" + key + "'");
      }
      return it->second.first;
    };
    if (record.count("submission_id") != 0) {
      manifest.submission_id = field("submission_id");
      continue;
    }
    ManifestEntry entry;
    entry.frame_id = field("frame_id");
    const auto subset = parse_subset(field("subset"));
    if (!subset) {
      throw Error(ErrorCode::kInvalidArgument, "frame '" + entry.frame_id +
                                                   "': unknown subset '" +
                                                   field("subset") + "'");
    }
    entry.subset = *subset;
    entry.pred_path = resolve(field("pred"));
    entry.conf_path = resolve(field("conf"));
    entry.gt_path = resolve(field("gt"));
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

inline SubmissionManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open manifest " + path.string());
  return parse_manifest(in, path.parent_path());
}

// Paths are written relative to `base_dir` when they live below it.
inline void write_manifest(std::ostream& out, const SubmissionManifest& manifest,
                           const fs::path& base_dir) {
  auto rel = [&](const fs::path& p) {
    const fs::path r = p.lexically_relative(base_dir);
    return (r.empty() || *r.begin() == "..") ? p.generic_string() : r.generic_string();
  };
  out << "submission_id: " << manifest.submission_id << "\n";
  for (const auto& e : manifest.entries) {
    out << "\nframe_id: " << e.frame_id << "\nsubset: " << subset_id(e.subset)
        << "\npred: " << rel(e.pred_path) << "\nconf: " << rel(e.conf_path)
        << "\ngt: " << rel(e.gt_path) << "\n";
  }
}

inline void write_manifest(const fs::path& path, const SubmissionManifest& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write manifest " + path.string());
  write_manifest(out, manifest, path.parent_path());
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed for " + path.string());
}

// Structural problems of a manifest that do not need file contents.
inline ValidationReport check_manifest(const SubmissionManifest& manifest) {
  ValidationReport report;
  std::set<std::string> seen;
  for (const auto& e : manifest.entries) {
    if (!seen.insert(e.frame_id).second) {
      report.violations.push_back({e.frame_id, Rule::kDuplicateFrameId,
                                   "frame id listed more than once", std::nullopt, 0});
    }
  }
  return report;
}

struct Discovery {
  SubmissionManifest manifest;
  // Files that do not follow the naming convention; only populated in
  // strict mode.
  ValidationReport unexpected;
};

inline Discovery discover_submission(const fs::path& root, const fs::path& gt_root,
                                     bool strict) {
  if (!fs::is_directory(root)) {
    throw Error(ErrorCode::kIoFailure, "not a directory: " + root.string());
  }
  Discovery result;
  fs::path normalized = fs::absolute(root).lexically_normal();
  if (normalized.filename().empty()) normalized = normalized.parent_path();
  result.manifest.submission_id = normalized.filename().string();
  if (result.manifest.submission_id.empty()) result.manifest.submission_id = "submission";

  auto sorted_files = [](const fs::path& dir) {
    std::vector<fs::path> files;
    if (fs::is_directory(dir)) {
      for (const auto& item : fs::directory_iterator(dir)) files.push_back(item.path());
    }
    std::sort(files.begin(), files.end());
    return files;
  };
  auto flag_unexpected = [&](const fs::path& file, std::string why) {
    if (!strict) return;
    result.unexpected.violations.push_back(
        {file.filename().string(), Rule::kUnexpectedFile,
         std::move(why) + ": " + file.generic_string(), std::nullopt, 0});
  };

  if (strict) {
    for (const auto& p : sorted_files(root)) {
      if (fs::is_directory(p) && !parse_subset(p.filename().string())) {
        flag_unexpected(p, "not a subset directory");
      }
    }
  }

  for (Subset subset : kAllSubsets) {
    const std::string sid(subset_id(subset));
    const fs::path dir = root / sid;
    const fs::path gt_dir = gt_root / sid;
    const bool shared_tree = fs::absolute(dir).lexically_normal() ==
                             fs::absolute(gt_dir).lexically_normal();
    std::set<std::string> ids;
    auto take = [&](const std::string& name, std::string_view suffix) {
      if (!detail::ends_with(name, suffix) || name.size() == suffix.size()) return false;
      ids.insert(name.substr(0, name.size() - suffix.size()));
      return true;
    };
    for (const auto& file : sorted_files(dir)) {
      const std::string name = file.filename().string();
      if (take(name, kPredSuffix) || take(name, kConfSuffix)) continue;
      if (shared_tree && take(name, kGtSuffix)) continue;
      flag_unexpected(file, "name does not follow <frame>_{pred,conf,gt}.png");
    }
    if (!shared_tree) {
      for (const auto& file : sorted_files(gt_dir)) {
        if (!take(file.filename().string(), kGtSuffix)) {
          flag_unexpected(file, "name does not follow <frame>_gt.png");
        }
      }
    }
    for (const auto& id : ids) {
      result.manifest.entries.push_back({id, subset,
                                         dir / (id + std::string(kPredSuffix)),
                                         dir / (id + std::string(kConfSuffix)),
                                         gt_dir / (id + std::string(kGtSuffix))});
    }
  }
  sort_entries(result.manifest.entries);
  return result;
}

// A manifest file path or a submission directory.
inline Discovery load_submission(const fs::path& path, const fs::path& gt_root,
                                 bool strict) {
  if (fs::is_regular_file(path)) {
    Discovery d;
    d.manifest = read_manifest(path);
    return d;
  }
  if (!fs::exists(path)) {
    throw Error(ErrorCode::kIoFailure, "no such submission: " + path.string());
  }
  return discover_submission(path, gt_root.empty() ? path : gt_root, strict);
}

}  // namespace bravo
