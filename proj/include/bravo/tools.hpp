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

// Submission-side utilities: decoding per-pixel class scores into the
// class/confidence pair, averaging ensemble posteriors, re-normalizing
// confidences before 16-bit quantization, and the probability-map container.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bravo/core.hpp"
#include "bravo/error.hpp"

namespace bravo {

struct LogitTag {};
struct ProbabilityTag {};

// Per-pixel vectors of `classes` reals, pixel-major: values[(y*W + x)*C + c].
template <typename Tag>
class ClassVolume {
 public:
  ClassVolume() = default;
  ClassVolume(std::size_t width, std::size_t height, std::size_t classes)
      : width_(width), height_(height), classes_(classes),
        values_(width * height * classes, 0.0) {}
  ClassVolume(std::size_t width, std::size_t height, std::size_t classes,
              std::vector<double> values)
      : width_(width), height_(height), classes_(classes), values_(std::move(values)) {
    if (values_.size() != width_ * height_ * classes_) {
      throw Error(ErrorCode::kInvalidArgument, "class volume holds " +
                                                   std::to_string(values_.size()) +
                                                   " values, expected " +
                                                   std::to_string(width_ * height_ * classes_));
    }
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t classes() const noexcept { return classes_; }
  std::size_t pixels() const noexcept { return width_ * height_; }

  std::span<double> pixel(std::size_t i) { return {values_.data() + i * classes_, classes_}; }
  std::span<const double> pixel(std::size_t i) const {
    return {values_.data() + i * classes_, classes_};
  }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  template <typename Other>
  bool same_shape(const Other& o) const noexcept {
    return width_ == o.width() && height_ == o.height() && classes_ == o.classes();
  }

  friend bool operator==(const ClassVolume&, const ClassVolume&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t classes_ = 0;
  std::vector<double> values_;
};

using LogitMap = ClassVolume<LogitTag>;
using ProbabilityMap = ClassVolume<ProbabilityTag>;

// Throws InvalidArgument unless every pixel is a non-negative vector summing
// to one within `tolerance`.
inline void check_simplex(const ProbabilityMap& p, double tolerance = 1e-9) {
  for (std::size_t i = 0; i < p.pixels(); ++i) {
    double sum = 0.0;
    for (double v : p.pixel(i)) {
      if (!std::isfinite(v) || v < 0.0) {
        throw Error(ErrorCode::kInvalidArgument,
                    "pixel " + std::to_string(i) + " has a negative or non-finite probability");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > tolerance) {
      throw Error(ErrorCode::kInvalidArgument,
                  "pixel " + std::to_string(i) + " sums to " + std::to_string(sum));
    }
  }
}

inline ProbabilityMap softmax(const LogitMap& logits) {
  ProbabilityMap out(logits.width(), logits.height(), logits.classes());
  for (std::size_t i = 0; i < logits.pixels(); ++i) {
    const auto in = logits.pixel(i);
    for (double v : in) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kNonFiniteInput, "non-finite logit at pixel " + std::to_string(i));
      }
    }
    const double peak = *std::max_element(in.begin(), in.end());
    auto dst = out.pixel(i);
    double sum = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      dst[c] = std::exp(in[c] - peak);
      sum += dst[c];
    }
    for (double& v : dst) v /= sum;
  }
  return out;
}

// round-half-up of s * 65535, s in [0, 1].
inline std::uint16_t quantize_confidence(double s) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw Error(ErrorCode::kOutOfRange, "confidence " + std::to_string(s) + " outside [0, 1]");
  }
  return static_cast<std::uint16_t>(std::floor(s * kMaxConfidence + 0.5));
}

struct DecodedPrediction {
  ClassMap classes;
  ConfidenceMap confidence;
};

// Class = first index holding the per-pixel maximum; confidence = that
// maximum quantized to 16 bits.
template <typename Tag>
DecodedPrediction argmax_decode(const ClassVolume<Tag>& p) {
  if (p.classes() == 0 || p.classes() > 256) {
    throw Error(ErrorCode::kInvalidArgument, "class count must be in [1, 256]");
  }
  DecodedPrediction out{ClassMap(p.width(), p.height()), ConfidenceMap(p.width(), p.height())};
  for (std::size_t i = 0; i < p.pixels(); ++i) {
    const auto v = p.pixel(i);
    const auto best = std::max_element(v.begin(), v.end());
    out.classes[i] = static_cast<std::uint8_t>(best - v.begin());
    out.confidence[i] = quantize_confidence(std::clamp(*best, 0.0, 1.0));
  }
  return out;
}

// Predictive posterior of an ensemble: per-pixel, per-class mean over models.
// Each element's terms are summed in sorted order, so the result does not
// depend on the order of the models.
inline ProbabilityMap ensemble_mean(std::span<const ProbabilityMap> maps) {
  if (maps.empty()) throw Error(ErrorCode::kInvalidArgument, "ensemble needs at least one model");
  for (const auto& m : maps) {
    if (!m.same_shape(maps.front())) {
      throw Error(ErrorCode::kShapeMismatch, "ensemble members differ in width, height or classes");
    }
  }
  const auto& first = maps.front();
  ProbabilityMap out(first.width(), first.height(), first.classes());
  std::vector<double> terms(maps.size());
  const double q = static_cast<double>(maps.size());
  auto dst = out.values();
  for (std::size_t k = 0; k < dst.size(); ++k) {
    for (std::size_t m = 0; m < maps.size(); ++m) terms[m] = maps[m].values()[k];
    std::sort(terms.begin(), terms.end());
    double sum = 0.0;
    for (double t : terms) sum += t;
    dst[k] = sum / q;
  }
  return out;
}

// Piecewise-linear stretch of the low-confidence range before quantization:
// [0, 0.05] -> [0, 0.8] and [0.05, 1] -> [0.8, 1].
inline double renormalize_confidence(double s) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw Error(ErrorCode::kOutOfRange, "score " + std::to_string(s) + " outside [0, 1]");
  }
  if (s <= 0.05) return 16.0 * s;
  return 1.0 - (1.0 - s) * (0.2 / 0.95);
}

inline ConfidenceMap renormalize_map(const ConfidenceMap& in) {
  std::vector<std::uint16_t> table(kConfidenceLevels);
  for (int level = 0; level < kConfidenceLevels; ++level) {
    table[level] = quantize_confidence(renormalize_confidence(confidence_value(level)));
  }
  ConfidenceMap out(in.width(), in.height());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = table[in[i]];
  return out;
}

// ---------------------------------------------------------------------------
// Probability-map container:
//   bytes 0..3   magic "BRVP"
//   bytes 4..15  width, height, classes as little-endian uint32
//   then         width*height*classes little-endian IEEE-754 float32,
//                row-major pixels, classes innermost.

inline constexpr std::array<char, 4> kProbabilityMagic = {'B', 'R', 'V', 'P'};
// float32 storage only keeps about seven digits.
inline constexpr double kStoredSimplexTolerance = 1e-5;

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

inline std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(in[at + b]) << (8 * b);
  return v;
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_probability_map(const ProbabilityMap& p) {
  std::vector<std::uint8_t> out(kProbabilityMagic.begin(), kProbabilityMagic.end());
  out.reserve(16 + p.values().size() * 4);
  detail::put_u32(out, static_cast<std::uint32_t>(p.width()));
  detail::put_u32(out, static_cast<std::uint32_t>(p.height()));
  detail::put_u32(out, static_cast<std::uint32_t>(p.classes()));
  for (double v : p.values()) detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

inline ProbabilityMap decode_probability_map(std::span<const std::uint8_t> in,
                                             const std::string& name = "<memory>") {
  if (in.size() < 16 || !std::equal(kProbabilityMagic.begin(), kProbabilityMagic.end(),
                                    reinterpret_cast<const char*>(in.data()))) {
    throw Error(ErrorCode::kInvalidArgument, name + ": not a probability map (bad magic)");
  }
  const std::size_t w = detail::get_u32(in, 4);
  const std::size_t h = detail::get_u32(in, 8);
  const std::size_t c = detail::get_u32(in, 12);
  if (in.size() != 16 + w * h * c * 4) {
    throw Error(ErrorCode::kInvalidArgument, name + ": payload size does not match header");
  }
  std::vector<double> values(w * h * c);
  for (std::size_t k = 0; k < values.size(); ++k) {
    values[k] = std::bit_cast<float>(detail::get_u32(in, 16 + 4 * k));
  }
  ProbabilityMap map(w, h, c, std::move(values));
  try {
    check_simplex(map, kStoredSimplexTolerance);
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidArgument, name + ": " + e.what());
  }
  return map;
}

inline void write_probability_map(const std::filesystem::path& path, const ProbabilityMap& p) {
  const auto bytes = encode_probability_map(p);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed for " + path.string());
}

inline ProbabilityMap read_probability_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_probability_map(bytes, path.string());
}

}  // namespace bravo
