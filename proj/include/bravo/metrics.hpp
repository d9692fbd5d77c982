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

// Mergeable pixel statistics and the metrics computed from them.
//
// Every accumulator holds integer counts only, so merging is exact, order
// independent, and the metrics of a merged accumulator are bit-identical to
// those of a single pass over the same pixels. Ranking metrics run on score
// histograms: one ROC/PR threshold per occupied score level, highest first.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "bravo/core.hpp"
#include "bravo/error.hpp"

namespace bravo {

using Count = std::uint64_t;

// ---------------------------------------------------------------------------
// Confusion matrix

class ConfusionMatrix {
 public:
  static constexpr int kClasses = kNumClasses;

  void add(int gt, int pred, Count n = 1) { counts_[gt * kClasses + pred] += n; }
  Count operator()(int gt, int pred) const { return counts_[gt * kClasses + pred]; }

  Count total() const {
    Count sum = 0;
    for (Count c : counts_) sum += c;
    return sum;
  }

  ConfusionMatrix& merge(const ConfusionMatrix& other) {
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    return *this;
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::array<Count, kClasses * kClasses> counts_{};
};

// ---------------------------------------------------------------------------
// Score histogram: positive/negative counts per discrete score level. Higher
// levels rank first.

class ScoreHistogram {
 public:
  explicit ScoreHistogram(std::size_t levels = kConfidenceLevels)
      : pos_(levels, 0), neg_(levels, 0) {}

  std::size_t levels() const noexcept { return pos_.size(); }

  void add(std::size_t level, bool positive, Count n = 1) {
    (positive ? pos_ : neg_)[level] += n;
  }
  Count pos(std::size_t level) const { return pos_[level]; }
  Count neg(std::size_t level) const { return neg_[level]; }

  Count total_pos() const { return sum(pos_); }
  Count total_neg() const { return sum(neg_); }
  Count total() const { return total_pos() + total_neg(); }

  // Swaps the classes and reverses the ranking: level i becomes L-1-i.
  ScoreHistogram complement() const {
    ScoreHistogram out(levels());
    const std::size_t last = levels() - 1;
    for (std::size_t i = 0; i < levels(); ++i) {
      out.pos_[last - i] = neg_[i];
      out.neg_[last - i] = pos_[i];
    }
    return out;
  }

  ScoreHistogram& merge(const ScoreHistogram& other) {
    if (other.levels() != levels()) {
      throw Error(ErrorCode::kShapeMismatch, "histograms have " + std::to_string(levels()) +
                                                 " and " + std::to_string(other.levels()) +
                                                 " levels");
    }
    for (std::size_t i = 0; i < pos_.size(); ++i) {
      pos_[i] += other.pos_[i];
      neg_[i] += other.neg_[i];
    }
    return *this;
  }

  friend bool operator==(const ScoreHistogram&, const ScoreHistogram&) = default;

 private:
  static Count sum(const std::vector<Count>& v) {
    Count s = 0;
    for (Count c : v) s += c;
    return s;
  }

  std::vector<Count> pos_;
  std::vector<Count> neg_;
};

// ---------------------------------------------------------------------------
// Calibration bins: equal-width over [0,1], half-open except the last bin,
// which is closed. Confidence sums are kept as sums of raw 16-bit levels.

class CalibrationBins {
 public:
  struct Bin {
    Count count = 0;
    Count correct = 0;
    Count level_sum = 0;

    friend bool operator==(const Bin&, const Bin&) = default;
  };

  explicit CalibrationBins(std::size_t num_bins = 15) : bins_(num_bins) {
    if (num_bins == 0) throw Error(ErrorCode::kInvalidArgument, "ECE needs at least one bin");
  }

  std::size_t size() const noexcept { return bins_.size(); }
  const Bin& bin(std::size_t i) const { return bins_[i]; }

  // floor(B * level / 65535), with level 65535 folded into the last bin.
  std::size_t bin_index(std::uint16_t level) const {
    const std::size_t b = static_cast<std::size_t>(level) * bins_.size() / kMaxConfidence;
    return std::min(b, bins_.size() - 1);
  }

  void add(std::uint16_t level, bool correct) {
    Bin& b = bins_[bin_index(level)];
    ++b.count;
    b.correct += correct ? 1 : 0;
    b.level_sum += level;
  }

  Count total() const {
    Count n = 0;
    for (const Bin& b : bins_) n += b.count;
    return n;
  }

  CalibrationBins& merge(const CalibrationBins& other) {
    if (other.size() != size()) {
      throw Error(ErrorCode::kShapeMismatch, "calibration bin counts differ (" +
                                                 std::to_string(size()) + " vs " +
                                                 std::to_string(other.size()) + ")");
    }
    for (std::size_t i = 0; i < bins_.size(); ++i) {
      bins_[i].count += other.bins_[i].count;
      bins_[i].correct += other.bins_[i].correct;
      bins_[i].level_sum += other.bins_[i].level_sum;
    }
    return *this;
  }

  friend bool operator==(const CalibrationBins&, const CalibrationBins&) = default;

 private:
  std::vector<Bin> bins_;
};

// ---------------------------------------------------------------------------
// Semantic accumulator

struct SemanticAccumulator {
  explicit SemanticAccumulator(std::size_t ece_bins = 15) : calibration(ece_bins) {}

  ConfusionMatrix confusion;
  // Positives are correctly classified pixels, keyed by confidence level.
  ScoreHistogram correctness;
  CalibrationBins calibration;

  Count pixels() const { return confusion.total(); }

  SemanticAccumulator& merge(const SemanticAccumulator& other) {
    calibration.merge(other.calibration);
    correctness.merge(other.correctness);
    confusion.merge(other.confusion);
    return *this;
  }

  friend bool operator==(const SemanticAccumulator&, const SemanticAccumulator&) = default;
};

// Value-returning merge for any accumulator type.
template <typename Accumulator>
Accumulator merge(Accumulator a, const Accumulator& b) {
  a.merge(b);
  return a;
}

namespace detail {

template <typename... Maps>
void require_same_shape(const RoleMap& roles, const Maps&... maps) {
  if (!(maps.same_shape(roles) && ...)) {
    throw Error(ErrorCode::kRoleMapMismatch, "role map is " + std::to_string(roles.width()) +
                                                 "x" + std::to_string(roles.height()) +
                                                 " but an input map differs");
  }
}

}  // namespace detail

inline void accumulate_semantic(SemanticAccumulator& acc, const ClassMap& pred,
                                const ConfidenceMap& conf, const GroundTruthFrame& gt,
                                const RoleMap& roles) {
  detail::require_same_shape(roles, pred, conf, gt);
  for (std::size_t i = 0; i < roles.size(); ++i) {
    if (roles[i] != PixelRole::kSemanticValid) continue;
    const int g = gt[i];
    const int p = pred[i];
    if (g >= kNumClasses || p >= kNumClasses) {
      throw Error(ErrorCode::kInvalidArgument,
                  "class id out of range at pixel " + std::to_string(i));
    }
    const bool correct = p == g;
    acc.confusion.add(g, p);
    acc.correctness.add(conf[i], correct);
    acc.calibration.add(conf[i], correct);
  }
}

// OOD score is the reversed confidence: level 65535 - conf ranks first.
inline void accumulate_ood(ScoreHistogram& hist, const ConfidenceMap& conf,
                           const RoleMap& roles) {
  detail::require_same_shape(roles, conf);
  if (hist.levels() != kConfidenceLevels) {
    throw Error(ErrorCode::kShapeMismatch, "OOD histogram must have 65536 levels");
  }
  for (std::size_t i = 0; i < roles.size(); ++i) {
    const PixelRole r = roles[i];
    if (r == PixelRole::kOodPositive || r == PixelRole::kOodNegative) {
      hist.add(kMaxConfidence - conf[i], r == PixelRole::kOodPositive);
    }
  }
}

// ---------------------------------------------------------------------------
// Metrics

// IoU per class; empty for classes absent from both ground truth and
// prediction.
inline std::array<std::optional<double>, kNumClasses> per_class_iou(
    const ConfusionMatrix& c) {
  std::array<std::optional<double>, kNumClasses> iou;
  for (int k = 0; k < kNumClasses; ++k) {
    Count row = 0, col = 0;
    for (int j = 0; j < kNumClasses; ++j) {
      row += c(k, j);
      col += c(j, k);
    }
    const Count tp = c(k, k);
    const Count uni = row + col - tp;
    if (uni > 0) iou[k] = static_cast<double>(tp) / static_cast<double>(uni);
  }
  return iou;
}

inline double miou(const ConfusionMatrix& c) {
  double sum = 0.0;
  int present = 0;
  for (const auto& iou : per_class_iou(c)) {
    if (iou) {
      sum += *iou;
      ++present;
    }
  }
  if (present == 0) throw Error(ErrorCode::kEmptyEvaluation, "no class has a nonzero union");
  return sum / present;
}

inline double ece(const CalibrationBins& bins) {
  // sum_b |correct_b - level_sum_b / 65535| / N, kept in integers until the
  // final division.
  unsigned __int128 gap = 0;
  Count n = 0;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const auto& b = bins.bin(i);
    const unsigned __int128 acc = static_cast<unsigned __int128>(b.correct) * kMaxConfidence;
    const unsigned __int128 conf = b.level_sum;
    gap += acc > conf ? acc - conf : conf - acc;
    n += b.count;
  }
  if (n == 0) throw Error(ErrorCode::kEmptyEvaluation, "no pixel in calibration bins");
  return static_cast<double>(gap) / (static_cast<double>(kMaxConfidence) * static_cast<double>(n));
}

namespace detail {

inline void require_both_classes(Count p, Count n) {
  if (p == 0 || n == 0) {
    throw Error(ErrorCode::kDegenerateClasses,
                std::to_string(p) + " positives, " + std::to_string(n) + " negatives");
  }
}

}  // namespace detail

// Mann-Whitney statistic with ties counted one half; identical to the
// trapezoidal area under the ROC polyline through every occupied level.
inline double auroc(const ScoreHistogram& h) {
  const Count p = h.total_pos();
  const Count n = h.total_neg();
  detail::require_both_classes(p, n);
  unsigned __int128 twice_wins = 0;
  unsigned __int128 pos_above = 0;
  for (std::size_t level = h.levels(); level-- > 0;) {
    const Count neg = h.neg(level);
    if (neg != 0) twice_wins += static_cast<unsigned __int128>(neg) * (2 * pos_above + h.pos(level));
    pos_above += h.pos(level);
  }
  const unsigned __int128 twice_pairs = static_cast<unsigned __int128>(2) * p * n;
  return static_cast<double>(twice_wins) / static_cast<double>(twice_pairs);
}

// FPR where the ROC first reaches `target_tpr`, linearly interpolated between
// the two bracketing vertices.
inline double fpr_at_tpr(const ScoreHistogram& h, double target_tpr) {
  const Count p = h.total_pos();
  const Count n = h.total_neg();
  detail::require_both_classes(p, n);
  double prev_tpr = 0.0, prev_fpr = 0.0;
  Count tp = 0, fp = 0;
  for (std::size_t level = h.levels(); level-- > 0;) {
    if (h.pos(level) == 0 && h.neg(level) == 0) continue;
    tp += h.pos(level);
    fp += h.neg(level);
    const double tpr = static_cast<double>(tp) / static_cast<double>(p);
    const double fpr = static_cast<double>(fp) / static_cast<double>(n);
    if (tpr >= target_tpr) {
      if (tpr == target_tpr) return fpr;
      return prev_fpr + (target_tpr - prev_tpr) * (fpr - prev_fpr) / (tpr - prev_tpr);
    }
    prev_tpr = tpr;
    prev_fpr = fpr;
  }
  return 1.0;  // unreachable: the last vertex is (1, 1)
}

inline double fpr_at_95tpr(const ScoreHistogram& h) { return fpr_at_tpr(h, 0.95); }

// Average precision: sum over thresholds of (R_t - R_{t-1}) * P_t, where a
// threshold includes every pixel at or above its level.
inline double aupr(const ScoreHistogram& h) {
  const Count p = h.total_pos();
  if (p == 0) throw Error(ErrorCode::kNoPositives, "precision-recall needs a positive pixel");
  double ap = 0.0;
  Count tp = 0, fp = 0;
  for (std::size_t level = h.levels(); level-- > 0;) {
    const Count pos = h.pos(level);
    tp += pos;
    fp += h.neg(level);
    if (pos != 0) {
      ap += static_cast<double>(pos) * static_cast<double>(tp) / static_cast<double>(tp + fp);
    }
  }
  return ap / static_cast<double>(p);
}

// AP of "pixel is incorrect", ranked by reversed confidence.
inline double aupr_error(const ScoreHistogram& correctness) {
  if (correctness.total_neg() == 0) {
    throw Error(ErrorCode::kNoPositives, "no incorrect pixel in the population");
  }
  return aupr(correctness.complement());
}

}  // namespace bravo
