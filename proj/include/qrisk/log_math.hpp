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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "qrisk/errors.hpp"

/**
 * @file log_math.hpp
 *
 * @brief Log-space combinatorial primitives.
 *
 * Everything here derives from the log-gamma function. Large-argument beta
 * values use Stirling's series for the remainder terms so that no
 * significant digits are lost to cancellation between huge log-gamma values.
 */

namespace qrisk {

/// Natural logarithm of a non-negative weight. Zero maps to -infinity.
struct LogWeight {
  double value = -std::numeric_limits<double>::infinity();

  static constexpr LogWeight zero() noexcept { return {}; }
  static constexpr LogWeight one() noexcept { return {0.0}; }
  static LogWeight from_linear(double x) noexcept { return {std::log(x)}; }

  bool is_zero() const noexcept { return value == -std::numeric_limits<double>::infinity(); }
  double linear() const noexcept { return std::exp(value); }

  friend LogWeight operator*(LogWeight a, LogWeight b) noexcept {
    if (a.is_zero() || b.is_zero()) return zero();
    return {a.value + b.value};
  }
  friend LogWeight operator/(LogWeight a, LogWeight b) noexcept {
    if (a.is_zero()) return zero();
    return {a.value - b.value};
  }
  friend LogWeight operator+(LogWeight a, LogWeight b) noexcept {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    const double hi = std::max(a.value, b.value);
    const double lo = std::min(a.value, b.value);
    return {hi + std::log1p(std::exp(lo - hi))};
  }
  friend bool operator==(LogWeight, LogWeight) = default;
};

/// Sum of weights, accumulated in index order.
inline LogWeight log_sum(std::span<const LogWeight> terms) noexcept {
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& t : terms) hi = std::max(hi, t.value);
  if (hi == -std::numeric_limits<double>::infinity()) return LogWeight::zero();
  double acc = 0.0;
  for (const auto& t : terms) acc += std::exp(t.value - hi);
  return {hi + std::log(acc)};
}

namespace detail {

// lgamma(x) - [(x - 1/2) ln x - x + ln sqrt(2 pi)] for x >= 10.
inline double stirling_remainder(double x) noexcept {
  static constexpr double kCoeff[] = {1.0 / 12,         -1.0 / 360,  1.0 / 1260,
                                      -1.0 / 1680,      1.0 / 1188,  -691.0 / 360360,
                                      1.0 / 156,        -3617.0 / 122400};
  const double r = 1.0 / (x * x);
  double s = 0.0;
  for (int i = 7; i >= 0; --i) s = s * r + kCoeff[i];
  return s / x;
}

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

}  // namespace detail

inline double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma requires a positive argument");
  return boost::math::lgamma(x);
}

/// ln B(alpha, beta). Symmetric in its arguments by construction.
inline LogWeight log_beta(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    throw DomainError("log_beta requires positive finite arguments");
  }
  const double p = std::min(alpha, beta);
  const double q = std::max(alpha, beta);
  const double ratio = p / (p + q);
  if (p >= 10.0) {
    const double corr = detail::stirling_remainder(p) + detail::stirling_remainder(q) -
                        detail::stirling_remainder(p + q);
    return {-0.5 * std::log(q) + detail::kLogSqrt2Pi + corr + (p - 0.5) * std::log(ratio) +
            q * std::log1p(-ratio)};
  }
  if (q >= 10.0) {
    const double corr = detail::stirling_remainder(q) - detail::stirling_remainder(p + q);
    return {boost::math::lgamma(p) + corr + p - p * std::log(p + q) +
            (q - 0.5) * std::log1p(-ratio)};
  }
  return {boost::math::lgamma(p) + boost::math::lgamma(q) - boost::math::lgamma(p + q)};
}

/// ln C(n, k) = -ln(n + 1) - ln B(n - k + 1, k + 1).
inline LogWeight log_binomial(long n, long k) {
  if (n < 0 || k < 0 || k > n) {
    throw DomainError("log_binomial requires 0 <= k <= n (got n=" + std::to_string(n) +
                      ", k=" + std::to_string(k) + ")");
  }
  if (k == 0 || k == n) return LogWeight::one();
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  return {-std::log(nd + 1.0) - log_beta(nd - kd + 1.0, kd + 1.0).value};
}

}  // namespace qrisk
