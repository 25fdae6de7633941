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
#include <array>
#include <cmath>
#include <cstddef>
#include <utility>

/**
 * @file nelder_mead.hpp
 *
 * @brief Derivative-free simplex minimizer (Nelder-Mead with the standard
 * reflection 1, expansion 2, contraction 1/2 and shrink 1/2 coefficients).
 */

namespace qrisk {

struct SimplexOptions {
  double initial_step = 0.5;
  // Stop once the spread of objective values across the simplex is below
  // `f_tolerance` and every vertex is within `x_tolerance` of the best one.
  double f_tolerance = 1e-12;
  double x_tolerance = 1e-10;
  int max_iterations = 10000;
};

template <std::size_t N>
struct SimplexResult {
  std::array<double, N> x{};
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

template <std::size_t N, typename Objective>
SimplexResult<N> nelder_mead(Objective&& f, const std::array<double, N>& start,
                             const SimplexOptions& opts = {}) {
  using Point = std::array<double, N>;
  std::array<Point, N + 1> pts;
  std::array<double, N + 1> vals;
  pts[0] = start;
  for (std::size_t i = 0; i < N; ++i) {
    pts[i + 1] = start;
    pts[i + 1][i] += opts.initial_step;
  }
  for (std::size_t i = 0; i <= N; ++i) vals[i] = f(pts[i]);

  auto blend = [](const Point& a, const Point& b, double t) {
    Point r;
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + t * (b[i] - a[i]);
    return r;
  };

  SimplexResult<N> out;
  std::array<std::size_t, N + 1> order;
  for (int iter = 0;; ++iter) {
    for (std::size_t i = 0; i <= N; ++i) order[i] = i;
    // Stable sort keeps vertex order deterministic on ties.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[N - 1];

    double x_spread = 0.0;
    for (std::size_t i = 0; i <= N; ++i) {
      for (std::size_t j = 0; j < N; ++j) {
        x_spread = std::max(x_spread, std::abs(pts[i][j] - pts[best][j]));
      }
    }
    const bool done = vals[worst] - vals[best] <= opts.f_tolerance && x_spread <= opts.x_tolerance;
    if (done || iter >= opts.max_iterations) {
      out.x = pts[best];
      out.value = vals[best];
      out.iterations = iter;
      out.converged = done;
      return out;
    }

    Point centroid{};
    for (std::size_t i = 0; i <= N; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < N; ++j) centroid[j] += pts[i][j] / static_cast<double>(N);
    }

    const Point reflected = blend(centroid, pts[worst], -1.0);
    const double f_reflected = f(reflected);
    if (f_reflected < vals[best]) {
      const Point expanded = blend(centroid, pts[worst], -2.0);
      const double f_expanded = f(expanded);
      if (f_expanded < f_reflected) {
        pts[worst] = expanded;
        vals[worst] = f_expanded;
      } else {
        pts[worst] = reflected;
        vals[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < vals[second_worst]) {
      pts[worst] = reflected;
      vals[worst] = f_reflected;
      continue;
    }
    const bool outside = f_reflected < vals[worst];
    const Point contracted = outside ? blend(centroid, reflected, 0.5)
                                     : blend(centroid, pts[worst], 0.5);
    const double f_contracted = f(contracted);
    if (f_contracted < (outside ? f_reflected : vals[worst])) {
      pts[worst] = contracted;
      vals[worst] = f_contracted;
      continue;
    }
    for (std::size_t i = 0; i <= N; ++i) {
      if (i == best) continue;
      pts[i] = blend(pts[best], pts[i], 0.5);
      vals[i] = f(pts[i]);
    }
  }
}

}  // namespace qrisk
