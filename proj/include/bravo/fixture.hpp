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

// Seeded synthetic benchmark fixtures with documented statistical laws.
//
// Per frame, independently of generation order:
//  * ground truth is a grid of 16x16 tiles, each holding one random class;
//  * each pixel is void (255) with probability `void_fraction`;
//  * on OOD subsets exactly round(ood_fraction * W * H) random pixels are
//    relabelled 254;
//  * a valid pixel draws a true accuracy p ~ U[1-e-h, 1-e+h] (e = error_rate,
//    h = half-width, see `accuracy_half_width`). Its prediction is correct
//    with probability p, except under kPerfect where the correctness law is
//    the quantized confidence itself (level / 65535);
//  * reported confidence is p (kPerfect), p + delta (kOverConfident) or
//    p - delta (kUnderConfident), clamped to [0, 1] and quantized;
//  * OOD pixels get a random class and confidence ~ U[0, 0.9];
//  * void pixels get a random class and confidence ~ U[0, 1].
// Wrong predictions pick one of the 18 other classes uniformly.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "bravo/core.hpp"
#include "bravo/error.hpp"
#include "bravo/manifest.hpp"
#include "bravo/pngio.hpp"
#include "bravo/tools.hpp"

namespace bravo {

enum class CalibrationLaw { kPerfect, kOverConfident, kUnderConfident };

struct FixtureSpec {
  std::size_t width = 64;
  std::size_t height = 32;
  std::size_t frames_per_subset = 2;
  double error_rate = 0.1;
  CalibrationLaw calibration = CalibrationLaw::kPerfect;
  double delta = 0.0;
  double ood_fraction = 0.05;
  double void_fraction = 0.01;
  std::uint64_t seed = 0;
  std::string submission_id = "synthetic";
};

inline constexpr double kOodConfidenceMax = 0.9;
inline constexpr std::size_t kTileSize = 16;

inline void check_fixture_spec(const FixtureSpec& s) {
  auto unit = [](double v) { return v >= 0.0 && v < 1.0; };
  if (s.width == 0 || s.height == 0 || s.frames_per_subset == 0) {
    throw Error(ErrorCode::kInvalidArgument, "fixture needs nonzero width, height and frames");
  }
  if (!unit(s.error_rate) || !unit(s.ood_fraction) || !unit(s.void_fraction) || !unit(s.delta)) {
    throw Error(ErrorCode::kInvalidArgument,
                "error_rate, ood_fraction, void_fraction and delta must lie in [0, 1)");
  }
}

// Half-width of the accuracy distribution around 1 - e, narrowed so that the
// shifted confidence p +/- delta stays inside [0, 1] whenever possible.
inline double accuracy_half_width(const FixtureSpec& s) {
  const double e = s.error_rate;
  double h = std::min(e, 1.0 - e);
  if (s.calibration == CalibrationLaw::kOverConfident) h = std::min(h, std::max(0.0, e - s.delta));
  if (s.calibration == CalibrationLaw::kUnderConfident) {
    h = std::min(h, std::max(0.0, 1.0 - e - s.delta));
  }
  return h;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// mt19937_64's output sequence is fixed by the standard; the distributions
// in <random> are not, so the draws below are derived from raw output.
class FixtureRng {
 public:
  explicit FixtureRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

 private:
  std::mt19937_64 engine_;
};

inline std::uint64_t frame_seed(std::uint64_t seed, Subset subset, std::size_t index) {
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ static_cast<std::uint64_t>(subset));
  return splitmix64(s ^ static_cast<std::uint64_t>(index));
}

}  // namespace detail

struct SyntheticFrame {
  GroundTruthFrame gt;
  ClassMap pred;
  ConfidenceMap conf;
};

inline SyntheticFrame synth_frame(const FixtureSpec& spec, Subset subset, std::size_t index) {
  check_fixture_spec(spec);
  const std::size_t w = spec.width, h = spec.height, n = w * h;
  detail::FixtureRng rng(detail::frame_seed(spec.seed, subset, index));
  SyntheticFrame f{GroundTruthFrame(w, h), ClassMap(w, h), ConfidenceMap(w, h)};

  const std::size_t tiles_x = (w + kTileSize - 1) / kTileSize;
  const std::size_t tiles_y = (h + kTileSize - 1) / kTileSize;
  std::vector<std::uint8_t> tile_class(tiles_x * tiles_y);
  for (auto& c : tile_class) c = static_cast<std::uint8_t>(rng.below(kNumClasses));
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      f.gt(x, y) = tile_class[(y / kTileSize) * tiles_x + x / kTileSize];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.bernoulli(spec.void_fraction)) f.gt[i] = kVoidLabel;
  }
  if (ood_eval(subset)) {
    const auto k = static_cast<std::size_t>(std::llround(spec.ood_fraction * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(order[i], order[i + rng.below(n - i)]);
      f.gt[order[i]] = kOodLabel;
    }
  }

  const double center = 1.0 - spec.error_rate;
  const double half = accuracy_half_width(spec);
  const double shift = spec.calibration == CalibrationLaw::kOverConfident    ? spec.delta
                       : spec.calibration == CalibrationLaw::kUnderConfident ? -spec.delta
                                                                             : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t g = f.gt[i];
    if (g == kOodLabel || g == kVoidLabel) {
      f.pred[i] = static_cast<std::uint8_t>(rng.below(kNumClasses));
      const double cmax = g == kOodLabel ? kOodConfidenceMax : 1.0;
      f.conf[i] = quantize_confidence(rng.uniform(0.0, cmax));
      continue;
    }
    const double p = std::clamp(rng.uniform(center - half, center + half), 0.0, 1.0);
    f.conf[i] = quantize_confidence(std::clamp(p + shift, 0.0, 1.0));
    const double law = spec.calibration == CalibrationLaw::kPerfect ? confidence_value(f.conf[i]) : p;
    const bool correct = rng.bernoulli(law);
    f.pred[i] = correct ? g
                        : static_cast<std::uint8_t>((g + 1 + rng.below(kNumClasses - 1)) %
                                                    kNumClasses);
  }
  return f;
}

inline std::string fixture_frame_id(Subset subset, std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", index);
  return std::string(subset_id(subset)) + "_" + buf;
}

// Writes `<root>/<subset>/<frame>_{pred,conf,gt}.png` for every subset plus
// `<root>/manifest.txt`, and returns the manifest.
inline SubmissionManifest write_fixture(const FixtureSpec& spec, const std::filesystem::path& root) {
  check_fixture_spec(spec);
  SubmissionManifest manifest{spec.submission_id, {}};
  std::error_code ec;
  for (Subset subset : kAllSubsets) {
    const auto dir = root / std::string(subset_id(subset));
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::kIoFailure, "cannot create " + dir.string() + ": " + ec.message());
    for (std::size_t i = 0; i < spec.frames_per_subset; ++i) {
      const SyntheticFrame f = synth_frame(spec, subset, i);
      const std::string id = fixture_frame_id(subset, i);
      ManifestEntry e{id, subset, dir / (id + std::string(kPredSuffix)),
                      dir / (id + std::string(kConfSuffix)), dir / (id + std::string(kGtSuffix))};
      write_class_png(e.pred_path, f.pred);
      write_conf_png(e.conf_path, f.conf);
      write_gt_png(e.gt_path, f.gt);
      manifest.entries.push_back(std::move(e));
    }
  }
  write_manifest(root / "manifest.txt", manifest);
  return manifest;
}

}  // namespace bravo
