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

// Domain types for submission evaluation: per-pixel rasters, the six-subset
// taxonomy, pair validation and the assignment of pixels to metric roles.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bravo/error.hpp"

namespace bravo {

inline constexpr int kNumClasses = 19;
inline constexpr std::uint8_t kOodLabel = 254;
inline constexpr std::uint8_t kVoidLabel = 255;
inline constexpr int kConfidenceLevels = 65536;
inline constexpr std::uint16_t kMaxConfidence = 65535;

// Row-major single-channel image. The tag keeps class maps, confidence maps
// and ground truth from being mixed up even when they share a sample type.
template <typename Sample, typename Tag>
class Raster {
 public:
  using sample_type = Sample;

  Raster() = default;
  Raster(std::size_t width, std::size_t height, Sample fill = Sample{})
      : width_(width), height_(height), samples_(width * height, fill) {}
  Raster(std::size_t width, std::size_t height, std::vector<Sample> samples)
      : width_(width), height_(height), samples_(std::move(samples)) {
    if (samples_.size() != width_ * height_) {
      throw Error(ErrorCode::kInvalidArgument,
                  "raster holds " + std::to_string(samples_.size()) +
                      " samples, expected " + std::to_string(width_ * height_));
    }
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool same_shape(std::size_t w, std::size_t h) const noexcept {
    return width_ == w && height_ == h;
  }
  template <typename OtherRaster>
  bool same_shape(const OtherRaster& other) const noexcept {
    return same_shape(other.width(), other.height());
  }

  Sample& operator()(std::size_t x, std::size_t y) { return samples_[y * width_ + x]; }
  const Sample& operator()(std::size_t x, std::size_t y) const {
    return samples_[y * width_ + x];
  }
  Sample& operator[](std::size_t i) { return samples_[i]; }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }

  std::span<Sample> samples() noexcept { return samples_; }
  std::span<const Sample> samples() const noexcept { return samples_; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<Sample> samples_;
};

struct ClassTag {};
struct ConfidenceTag {};
struct GroundTruthTag {};
struct RoleTag {};

// Predicted class ids; legal values are 0..18 (checked by validate_pair).
using ClassMap = Raster<std::uint8_t, ClassTag>;
// Quantized confidence; level / 65535 is the real-valued confidence.
using ConfidenceMap = Raster<std::uint16_t, ConfidenceTag>;
// 0..18 valid class, 254 OOD object (invalid pixel), 255 void.
using GroundTruthFrame = Raster<std::uint8_t, GroundTruthTag>;

inline double confidence_value(std::uint16_t level) {
  return static_cast<double>(level) / kMaxConfidence;
}

// ---------------------------------------------------------------------------
// Subsets

enum class Subset { kAcdc, kSmiyc, kSynRain, kSynObjs, kSynFlare, kOutOfContext };

inline constexpr std::array<Subset, 6> kAllSubsets = {
    Subset::kAcdc,    Subset::kSmiyc,    Subset::kSynRain,
    Subset::kSynObjs, Subset::kSynFlare, Subset::kOutOfContext};

// Semantic metrics cover every subset except SMIYC.
constexpr bool semantic_eval(Subset s) { return s != Subset::kSmiyc; }
// OOD metrics only exist where OOD objects are annotated.
constexpr bool ood_eval(Subset s) {
  return s == Subset::kSmiyc || s == Subset::kSynObjs;
}

// Canonical lowercase id, used for directory names and in report files.
inline std::string_view subset_id(Subset s) {
  switch (s) {
    case Subset::kAcdc: return "acdc";
    case Subset::kSmiyc: return "smiyc";
    case Subset::kSynRain: return "synrain";
    case Subset::kSynObjs: return "synobjs";
    case Subset::kSynFlare: return "synflare";
    case Subset::kOutOfContext: return "outofcontext";
  }
  return "?";
}

inline std::string_view subset_display_name(Subset s) {
  switch (s) {
    case Subset::kAcdc: return "ACDC";
    case Subset::kSmiyc: return "SMIYC";
    case Subset::kSynRain: return "synrain";
    case Subset::kSynObjs: return "synobjs";
    case Subset::kSynFlare: return "synflare";
    case Subset::kOutOfContext: return "outofcontext";
  }
  return "?";
}

// Accepts the canonical id in any letter case ("ACDC", "SynObjs", ...).
inline std::optional<Subset> parse_subset(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (Subset s : kAllSubsets) {
    if (subset_id(s) == lower) return s;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Validation

enum class Rule {
  kDimensionMismatch,
  kClassOutOfRange,
  kGroundTruthCodeInvalid,
  kGroundTruthAllVoid,
  kMissingFile,
  kNotPng,
  kWrongBitDepth,
  kWrongChannelCount,
  kCorruptFile,
  kDuplicateFrameId,
  kUnexpectedFile,
};

inline std::string_view to_string(Rule rule) {
  switch (rule) {
    case Rule::kDimensionMismatch: return "DimensionMismatch";
    case Rule::kClassOutOfRange: return "ClassOutOfRange";
    case Rule::kGroundTruthCodeInvalid: return "GroundTruthCodeInvalid";
    case Rule::kGroundTruthAllVoid: return "GroundTruthAllVoid";
    case Rule::kMissingFile: return "MissingFile";
    case Rule::kNotPng: return "NotPng";
    case Rule::kWrongBitDepth: return "WrongBitDepth";
    case Rule::kWrongChannelCount: return "WrongChannelCount";
    case Rule::kCorruptFile: return "CorruptFile";
    case Rule::kDuplicateFrameId: return "DuplicateFrameId";
    case Rule::kUnexpectedFile: return "UnexpectedFile";
  }
  return "?";
}

struct Violation {
  std::string frame;
  Rule rule;
  std::string detail;
  // Offending sample value, when the rule is about one (labels, bit depth).
  std::optional<long long> value;
  // Number of pixels carrying `value`; 0 when not pixel-based.
  std::size_t count = 0;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  void merge(const ValidationReport& other) {
    violations.insert(violations.end(), other.violations.begin(),
                      other.violations.end());
  }
};

namespace detail {

// One violation per distinct offending value, in ascending value order.
template <typename Sample, typename IsLegal>
void report_illegal_values(std::span<const Sample> samples, IsLegal is_legal,
                           const std::string& frame, Rule rule,
                           std::string_view what, ValidationReport& report) {
  std::map<long long, std::size_t> offenders;
  for (Sample v : samples) {
    if (!is_legal(v)) ++offenders[static_cast<long long>(v)];
  }
  for (const auto& [value, count] : offenders) {
    report.violations.push_back(
        {frame, rule,
         std::string(what) + " value " + std::to_string(value) + " on " +
             std::to_string(count) + " pixel(s)",
         value, count});
  }
}

inline std::string shape_string(std::size_t w, std::size_t h) {
  return std::to_string(w) + "x" + std::to_string(h);
}

}  // namespace detail

inline bool is_valid_class(std::uint8_t v) { return v < kNumClasses; }
inline bool is_valid_gt_code(std::uint8_t v) {
  return v < kNumClasses || v == kOodLabel || v == kVoidLabel;
}

// Collects every violation in the frame instead of stopping at the first.
inline ValidationReport validate_pair(const ClassMap& pred,
                                      const ConfidenceMap& conf,
                                      const GroundTruthFrame& gt,
                                      const std::string& frame = {}) {
  ValidationReport report;
  if (!pred.same_shape(gt) || !conf.same_shape(gt)) {
    report.violations.push_back(
        {frame, Rule::kDimensionMismatch,
         "pred " + detail::shape_string(pred.width(), pred.height()) + ", conf " +
             detail::shape_string(conf.width(), conf.height()) + ", gt " +
             detail::shape_string(gt.width(), gt.height()),
         std::nullopt, 0});
  }
  detail::report_illegal_values(pred.samples(), is_valid_class, frame,
                                Rule::kClassOutOfRange, "predicted class", report);
  detail::report_illegal_values(gt.samples(), is_valid_gt_code, frame,
                                Rule::kGroundTruthCodeInvalid,
                                "ground-truth code", report);
  const bool all_void = std::all_of(gt.samples().begin(), gt.samples().end(),
                                    [](std::uint8_t v) { return v == kVoidLabel; });
  if (all_void) {
    report.violations.push_back({frame, Rule::kGroundTruthAllVoid,
                                 "ground truth has no evaluable pixel",
                                 std::nullopt, 0});
  }
  return report;
}

// ---------------------------------------------------------------------------
// Pixel roles

enum class PixelRole : std::uint8_t {
  kExcluded,
  kSemanticValid,
  kOodPositive,
  kOodNegative,
};

enum class EvalMode { kSemantic, kOod };

using RoleMap = Raster<PixelRole, RoleTag>;

inline PixelRole pixel_role(std::uint8_t gt_code, Subset subset, EvalMode mode) {
  if (gt_code == kVoidLabel) return PixelRole::kExcluded;
  if (mode == EvalMode::kSemantic) {
    if (!semantic_eval(subset)) return PixelRole::kExcluded;
    return gt_code < kNumClasses ? PixelRole::kSemanticValid : PixelRole::kExcluded;
  }
  if (!ood_eval(subset)) return PixelRole::kExcluded;
  if (gt_code == kOodLabel) return PixelRole::kOodPositive;
  return gt_code < kNumClasses ? PixelRole::kOodNegative : PixelRole::kExcluded;
}

inline RoleMap pixel_roles(const GroundTruthFrame& gt, Subset subset, EvalMode mode) {
  RoleMap roles(gt.width(), gt.height(), PixelRole::kExcluded);
  for (std::size_t i = 0; i < gt.size(); ++i) roles[i] = pixel_role(gt[i], subset, mode);
  return roles;
}

}  // namespace bravo
