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

// Cross-submission analysis: OOD-vs-semantic scatter with a least-squares
// line and BRAVO level sets, and the per-subset summary correlogram.

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

#include "bravo/aggregate.hpp"
#include "bravo/core.hpp"
#include "bravo/error.hpp"

namespace bravo {

struct SubmissionPoint {
  std::string submission_id;
  int track = 1;
  double semantic_agg = 0.0;
  double ood_agg = 0.0;
  double bravo_index = 0.0;
  std::map<Subset, double> subset_summaries;
};

inline SubmissionPoint point_from_report(const AggregateReport& r) {
  SubmissionPoint p{r.submission_id, r.track, r.semantic_agg, r.ood_agg, r.bravo_index, {}};
  for (const auto& s : r.per_subset) p.subset_summaries[s.subset] = s.summary;
  return p;
}

namespace detail {

struct Moments {
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  double mean_x = 0.0;
  double mean_y = 0.0;
};

// Centered second moments, two-pass.
inline Moments centered_moments(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "correlation needs two equal-length series of length >= 2");
  }
  Moments m;
  for (std::size_t i = 0; i < x.size(); ++i) {
    m.mean_x += x[i];
    m.mean_y += y[i];
  }
  m.mean_x /= static_cast<double>(x.size());
  m.mean_y /= static_cast<double>(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - m.mean_x;
    const double dy = y[i] - m.mean_y;
    m.sxx += dx * dx;
    m.syy += dy * dy;
    m.sxy += dx * dy;
  }
  // A constant series can leave rounding residue in the centered sums, so
  // constancy is tested on the inputs themselves.
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double e) { return e == v.front(); });
  };
  if (constant(x) || constant(y) || m.sxx == 0.0 || m.syy == 0.0) {
    throw Error(ErrorCode::kDegenerateVariance, "a series has zero variance");
  }
  return m;
}

inline double correlation(const Moments& m) {
  return std::clamp(m.sxy / (std::sqrt(m.sxx) * std::sqrt(m.syy)), -1.0, 1.0);
}

}  // namespace detail

inline double pearson(std::span<const double> x, std::span<const double> y) {
  return detail::correlation(detail::centered_moments(x, y));
}

struct RegressionLine {
  double slope = 0.0;
  double intercept = 0.0;
  double r = 0.0;
};

inline RegressionLine linear_regression(std::span<const double> x, std::span<const double> y) {
  const detail::Moments m = detail::centered_moments(x, y);
  const double slope = m.sxy / m.sxx;
  return {slope, m.mean_y - slope * m.mean_x, detail::correlation(m)};
}

struct Correlogram {
  std::string estimator = "pearson";
  std::vector<Subset> subsets;
  // Empty cells mark zero-variance inputs.
  std::vector<std::vector<std::optional<double>>> r;
};

// Pairwise correlation of subset summaries over submissions, restricted to
// subsets that every submission reports.
inline Correlogram correlogram(std::span<const SubmissionPoint> points) {
  if (points.size() < 3) {
    throw Error(ErrorCode::kInvalidArgument, "correlogram needs at least 3 submissions");
  }
  Correlogram c;
  for (Subset s : kAllSubsets) {
    const bool everywhere = std::all_of(points.begin(), points.end(), [s](const auto& p) {
      return p.subset_summaries.count(s) != 0;
    });
    if (everywhere) c.subsets.push_back(s);
  }
  std::vector<std::vector<double>> series;
  for (Subset s : c.subsets) {
    std::vector<double> v;
    for (const auto& p : points) v.push_back(p.subset_summaries.at(s));
    series.push_back(std::move(v));
  }
  const std::size_t k = c.subsets.size();
  c.r.assign(k, std::vector<std::optional<double>>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      try {
        const double r = i == j ? (detail::centered_moments(series[i], series[i]), 1.0)
                                : pearson(series[i], series[j]);
        c.r[i][j] = r;
        c.r[j][i] = r;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateVariance) throw;
      }
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Emitters. Numbers are printed with fixed precision so output is
// byte-identical for identical input.

namespace detail {

inline std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot create " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed for " + path.string());
}

}  // namespace detail

// Scatter geometry: unit square of metric space mapped to a square plot area.
struct ScatterFrame {
  double margin = 60.0;
  double size = 520.0;

  double px(double ood) const { return margin + ood * size; }
  double py(double semantic) const { return margin + (1.0 - semantic) * size; }
  double canvas() const { return 2 * margin + size; }
};

inline constexpr std::array<double, 9> kBravoLevels = {0.1, 0.2, 0.3, 0.4, 0.5,
                                                       0.6, 0.7, 0.8, 0.9};

// Points (ood, semantic) on the iso-curve 2xy / (x + y) = level inside the
// unit square.
inline std::vector<std::pair<double, double>> level_curve(double level, int samples = 200) {
  std::vector<std::pair<double, double>> pts;
  const double x_min = level / (2.0 - level);
  for (int i = 0; i <= samples; ++i) {
    const double x = x_min + (1.0 - x_min) * i / samples;
    const double y = level * x / (2.0 * x - level);
    pts.emplace_back(x, std::min(y, 1.0));
  }
  return pts;
}

inline std::string render_scatter_svg(std::span<const SubmissionPoint> points) {
  if (points.empty()) throw Error(ErrorCode::kInvalidArgument, "scatter needs at least one point");
  const ScatterFrame f;
  using detail::fixed;
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(f.canvas(), 0)
      << "\" height=\"" << fixed(f.canvas(), 0) << "\" viewBox=\"0 0 " << fixed(f.canvas(), 0)
      << " " << fixed(f.canvas(), 0) << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<defs><clipPath id=\"plot\"><rect x=\"" << fixed(f.margin) << "\" y=\""
      << fixed(f.margin) << "\" width=\"" << fixed(f.size) << "\" height=\"" << fixed(f.size)
      << "\"/></clipPath></defs>\n"
      << "<rect class=\"frame\" x=\"" << fixed(f.margin) << "\" y=\"" << fixed(f.margin)
      << "\" width=\"" << fixed(f.size) << "\" height=\"" << fixed(f.size)
      << "\" fill=\"white\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double v = t / 5.0;
    svg << "<text x=\"" << fixed(f.px(v)) << "\" y=\"" << fixed(f.margin + f.size + 16)
        << "\" text-anchor=\"middle\">" << fixed(v * 100, 0) << "</text>\n"
        << "<text x=\"" << fixed(f.margin - 8) << "\" y=\"" << fixed(f.py(v) + 4)
        << "\" text-anchor=\"end\">" << fixed(v * 100, 0) << "</text>\n";
  }
  svg << "<text x=\"" << fixed(f.margin + f.size / 2) << "\" y=\""
      << fixed(f.margin + f.size + 40) << "\" text-anchor=\"middle\">OOD</text>\n"
      << "<text x=\"" << fixed(18) << "\" y=\"" << fixed(f.margin + f.size / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << fixed(f.margin + f.size / 2)
      << ")\">Semantic</text>\n";

  for (double level : kBravoLevels) {
    svg << "<polyline class=\"level\" data-level=\"" << fixed(level, 1)
        << "\" fill=\"none\" stroke=\"#bbbbbb\" points=\"";
    bool first = true;
    for (const auto& [x, y] : level_curve(level)) {
      svg << (first ? "" : " ") << fixed(f.px(x)) << "," << fixed(f.py(y));
      first = false;
    }
    svg << "\"/>\n";
  }

  std::vector<double> xs, ys;
  for (const auto& p : points) {
    xs.push_back(p.ood_agg);
    ys.push_back(p.semantic_agg);
  }
  if (points.size() >= 2) {
    try {
      const RegressionLine line = linear_regression(xs, ys);
      svg << "<line class=\"regression\" clip-path=\"url(#plot)\" x1=\"" << fixed(f.px(0.0))
          << "\" y1=\"" << fixed(f.py(line.intercept)) << "\" x2=\"" << fixed(f.px(1.0))
          << "\" y2=\"" << fixed(f.py(line.slope + line.intercept))
          << "\" stroke=\"green\" stroke-width=\"1.5\"/>\n"
          << "<text class=\"regression-r\" x=\"" << fixed(f.margin + f.size - 4) << "\" y=\""
          << fixed(f.margin + 16) << "\" text-anchor=\"end\" fill=\"green\">R = "
          << fixed(line.r, 2) << "</text>\n";
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateVariance) throw;
    }
  }

  for (const auto& p : points) {
    const char* color = p.track == 2 ? "#e67e22" : "#1f77b4";
    svg << "<circle class=\"point\" cx=\"" << fixed(f.px(p.ood_agg)) << "\" cy=\""
        << fixed(f.py(p.semantic_agg)) << "\" r=\"4\" fill=\"" << color << "\"/>\n"
        << "<text class=\"label\" x=\"" << fixed(f.px(p.ood_agg) + 6) << "\" y=\""
        << fixed(f.py(p.semantic_agg) - 6) << "\">" << detail::xml_escape(p.submission_id)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

inline std::string render_points_csv(std::span<const SubmissionPoint> points) {
  std::ostringstream csv;
  csv << "submission_id,track,semantic,ood,bravo_index";
  for (Subset s : kAllSubsets) csv << ",summary_" << subset_id(s);
  csv << "\n";
  for (const auto& p : points) {
    csv << detail::csv_field(p.submission_id) << "," << p.track << ","
        << detail::fixed(p.semantic_agg, 6) << "," << detail::fixed(p.ood_agg, 6) << ","
        << detail::fixed(p.bravo_index, 6);
    for (Subset s : kAllSubsets) {
      const auto it = p.subset_summaries.find(s);
      csv << "," << (it == p.subset_summaries.end() ? std::string() : detail::fixed(it->second, 6));
    }
    csv << "\n";
  }
  return csv.str();
}

// First header cell names the estimator; blank cells are undefined.
inline std::string render_correlogram_csv(const Correlogram& c) {
  std::ostringstream csv;
  csv << c.estimator << "_r";
  for (Subset s : c.subsets) csv << "," << subset_id(s);
  csv << "\n";
  for (std::size_t i = 0; i < c.subsets.size(); ++i) {
    csv << subset_id(c.subsets[i]);
    for (std::size_t j = 0; j < c.subsets.size(); ++j) {
      csv << "," << (c.r[i][j] ? detail::fixed(*c.r[i][j], 6) : std::string());
    }
    csv << "\n";
  }
  return csv.str();
}

inline std::string render_correlogram_svg(const Correlogram& c) {
  using detail::fixed;
  const double cell = 64.0, left = 110.0, top = 40.0;
  const double n = static_cast<double>(c.subsets.size());
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(left + n * cell + 20, 0)
      << "\" height=\"" << fixed(top + n * cell + 20, 0)
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<text x=\"" << fixed(left) << "\" y=\"20\">" << c.estimator
      << " correlation of subset summaries</text>\n";
  for (std::size_t i = 0; i < c.subsets.size(); ++i) {
    const std::string name(subset_display_name(c.subsets[i]));
    svg << "<text x=\"" << fixed(left - 6) << "\" y=\"" << fixed(top + (i + 0.5) * cell + 4)
        << "\" text-anchor=\"end\">" << name << "</text>\n";
    for (std::size_t j = 0; j < c.subsets.size(); ++j) {
      const double x = left + j * cell, y = top + i * cell;
      const auto& r = c.r[i][j];
      std::string fill = "#eeeeee";
      if (r) {
        // White at 0, red towards +1, blue towards -1.
        const int fade = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(*r))));
        char buf[16];
        if (*r >= 0) {
          std::snprintf(buf, sizeof buf, "#ff%02x%02x", fade, fade);
        } else {
          std::snprintf(buf, sizeof buf, "#%02x%02xff", fade, fade);
        }
        fill = buf;
      }
      svg << "<rect class=\"cell\" x=\"" << fixed(x) << "\" y=\"" << fixed(y) << "\" width=\""
          << fixed(cell) << "\" height=\"" << fixed(cell) << "\" fill=\"" << fill
          << "\" stroke=\"white\"/>\n";
      if (r) {
        svg << "<text x=\"" << fixed(x + cell / 2) << "\" y=\"" << fixed(y + cell / 2 + 4)
            << "\" text-anchor=\"middle\">" << fixed(*r, 2) << "</text>\n";
      }
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

// Writes scatter.svg and points.csv into `dir`.
inline void emit_scatter(std::span<const SubmissionPoint> points, const std::filesystem::path& dir) {
  detail::write_text(dir / "scatter.svg", render_scatter_svg(points));
  detail::write_text(dir / "points.csv", render_points_csv(points));
}

// Writes correlogram.csv and correlogram.svg into `dir`.
inline void emit_correlogram(const Correlogram& c, const std::filesystem::path& dir) {
  detail::write_text(dir / "correlogram.csv", render_correlogram_csv(c));
  detail::write_text(dir / "correlogram.svg", render_correlogram_svg(c));
}

}  // namespace bravo
