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

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qrisk/errors.hpp"
#include "qrisk/likelihood.hpp"
#include "qrisk/sensitivity.hpp"

/**
 * @file simulate.hpp
 *
 * @brief Monte Carlo version of the generative model, for validation only.
 *
 * Nothing here touches the combinatorial formulas: each replicate shuffles
 * an explicit vector of M slots labelled by test group, marks the first K as
 * infected and tests them with the day's sensitivity.
 */

namespace qrisk {

struct SimulationEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  long replicates = 0;
};

inline SimulationEstimate simulate_likelihood(const TestSchedule& schedule, int k,
                                              const SensitivityCurve& curve, long replicates,
                                              std::uint64_t seed) {
  if (replicates < 1000) throw DomainError("at least 1000 replicates required");
  if (k < 0 || k > schedule.group_size()) throw DomainError("K must lie in [0, M]");
  if (curve.specificity() != 1.0) throw UnsupportedModel("only specificity 1 is supported");

  // slot label: -1 untested, otherwise index into miss probabilities
  std::vector<int> slots;
  std::vector<double> miss;
  for (const auto& g : schedule.groups()) {
    for (int i = 0; i < g.count; ++i) slots.push_back(static_cast<int>(miss.size()));
    miss.push_back(1.0 - curve.at(g.day));
  }
  slots.resize(static_cast<std::size_t>(schedule.group_size()), -1);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t m = slots.size();
  long all_negative = 0;
  for (long rep = 0; rep < replicates; ++rep) {
    // Partial Fisher-Yates: positions [0, k) become a uniform k-subset.
    for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, m - 1);
      std::swap(slots[i], slots[pick(rng)]);
    }
    bool negative = true;
    for (std::size_t i = 0; i < static_cast<std::size_t>(k) && negative; ++i) {
      const int label = slots[i];
      if (label >= 0 && !(unit(rng) < miss[static_cast<std::size_t>(label)])) negative = false;
    }
    if (negative) ++all_negative;
  }

  SimulationEstimate out;
  out.replicates = replicates;
  out.estimate = static_cast<double>(all_negative) / static_cast<double>(replicates);
  out.standard_error =
      std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(replicates));
  return out;
}

}  // namespace qrisk
