// Copyright 2026 The qrisk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "qrisk/errors.hpp"

namespace qrisk {

struct CurvePoint {
  int day = 1;
  double sensitivity = 0.0;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

/**
 * @brief Day-dependent test sensitivity.
 *
 * `day` counts whole days elapsed since the group event, which the model
 * treats as the day of infection. Between tabulated days the curve is
 * interpolated linearly; outside the tabulated range it is clamped to the
 * nearest end point.
 */
class SensitivityCurve {
 public:
  SensitivityCurve(std::string name, std::vector<CurvePoint> points, double specificity = 1.0)
      : name_(std::move(name)), points_(std::move(points)), specificity_(specificity) {
    if (points_.empty()) throw DomainError("sensitivity curve needs at least one point");
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const auto& p = points_[i];
      if (p.day < 1) throw DomainError("curve day must be >= 1");
      if (i > 0 && p.day <= points_[i - 1].day) {
        throw DomainError("curve days must be strictly increasing");
      }
      if (!(p.sensitivity >= 0.0 && p.sensitivity <= 1.0)) {
        throw DomainError("curve sensitivity must lie in [0, 1]");
      }
    }
    if (!(specificity_ >= 0.0 && specificity_ <= 1.0)) {
      throw DomainError("specificity must lie in [0, 1]");
    }
  }

  const std::string& name() const noexcept { return name_; }
  const std::vector<CurvePoint>& points() const noexcept { return points_; }
  double specificity() const noexcept { return specificity_; }

  double at(int day) const {
    if (day < 1) {
      throw DomainError("test day must be >= 1 (got " + std::to_string(day) + ")");
    }
    if (day <= points_.front().day) return points_.front().sensitivity;
    if (day >= points_.back().day) return points_.back().sensitivity;
    std::size_t hi = 1;
    while (points_[hi].day < day) ++hi;
    const auto& b = points_[hi];
    if (b.day == day) return b.sensitivity;
    const auto& a = points_[hi - 1];
    const double t = static_cast<double>(day - a.day) / static_cast<double>(b.day - a.day);
    return a.sensitivity + t * (b.sensitivity - a.sensitivity);
  }

  friend bool operator==(const SensitivityCurve&, const SensitivityCurve&) = default;

 private:
  std::string name_;
  std::vector<CurvePoint> points_;
  double specificity_;
};

inline double sensitivity_at(const SensitivityCurve& curve, int day) { return curve.at(day); }

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end && !s.empty();
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    lines.push_back(text.substr(0, nl));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return lines;
}

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

/// Parses the `day,sensitivity` CSV format. Lines starting with `#` and
/// blank lines are ignored; the first remaining line must be the header.
inline SensitivityCurve load_curve(std::string_view source, std::string name = "custom",
                                   double specificity = 1.0) {
  if (source.size() >= 3 && source.substr(0, 3) == "\xEF\xBB\xBF") source.remove_prefix(3);
  std::vector<CurvePoint> points;
  bool seen_header = false;
  int line_no = 0;
  for (auto raw : detail::split_lines(source)) {
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!seen_header) {
      if (line != "day,sensitivity") {
        throw ParseError("expected header 'day,sensitivity'", line_no);
      }
      seen_header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
      throw ParseError("expected two comma-separated fields", line_no);
    }
    CurvePoint p;
    if (!detail::parse_number(line.substr(0, comma), p.day)) {
      throw ParseError("day is not an integer", line_no);
    }
    if (!detail::parse_number(line.substr(comma + 1), p.sensitivity)) {
      throw ParseError("sensitivity is not a number", line_no);
    }
    if (p.day < 1) throw ParseError("day must be >= 1", line_no);
    if (!(p.sensitivity >= 0.0 && p.sensitivity <= 1.0)) {
      throw ParseError("sensitivity outside [0, 1]", line_no);
    }
    if (!points.empty() && p.day <= points.back().day) {
      throw ParseError("days must be strictly increasing", line_no);
    }
    points.push_back(p);
  }
  if (!seen_header) throw ParseError("missing header 'day,sensitivity'", 0);
  if (points.empty()) throw ParseError("curve has no data rows", 0);
  return SensitivityCurve(std::move(name), std::move(points), specificity);
}

inline std::string serialize_curve(const SensitivityCurve& curve) {
  std::string out = "day,sensitivity\n";
  for (const auto& p : curve.points()) {
    out += std::to_string(p.day);
    out += ',';
    out += detail::format_double(p.sensitivity);
    out += '\n';
  }
  return out;
}

inline constexpr std::string_view kDefaultCurveId = "pcr_default";

/// Default PCR curve; identical to data/curves/pcr_default.csv.
inline const SensitivityCurve& default_pcr_curve() {
  static const SensitivityCurve curve = load_curve(
      "day,sensitivity\n"
      "1,0.00\n2,0.05\n3,0.18\n4,0.33\n5,0.62\n6,0.76\n7,0.79\n8,0.80\n9,0.79\n10,0.78\n"
      "11,0.74\n12,0.71\n13,0.67\n14,0.63\n15,0.59\n16,0.55\n17,0.51\n18,0.47\n19,0.43\n"
      "20,0.39\n21,0.34\n",
      std::string(kDefaultCurveId));
  return curve;
}

}  // namespace qrisk
