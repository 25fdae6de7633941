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
#include <string>
#include <vector>

#include "qrisk/errors.hpp"
#include "qrisk/log_math.hpp"
#include "qrisk/prior.hpp"
#include "qrisk/sensitivity.hpp"

/**
 * @file likelihood.hpp
 *
 * @brief Likelihood of an all-negative test record and the posterior over
 * the number of infected contacts.
 *
 * The M contacts are split into an untested group of size N_0 and day groups
 * of sizes N_1..N_n tested on days D_1..D_n. Given K infected, the infected
 * are spread over the groups as a multivariate hypergeometric draw
 * (K_0, ..., K_n), and an infected person tested on day D_d is negative with
 * probability 1 - s(D_d). Healthy persons always test negative.
 */

namespace qrisk {

struct DayGroup {
  int day = 1;    // whole days since the group event
  int count = 1;  // persons tested (all negative) on that day

  friend bool operator==(const DayGroup&, const DayGroup&) = default;
};

/// Day-stratified negative test record. Groups are kept sorted by day so
/// that every computation is independent of the order they were supplied in.
class TestSchedule {
 public:
  TestSchedule() = default;

  TestSchedule(int group_size, std::vector<DayGroup> groups)
      : group_size_(group_size), groups_(std::move(groups)) {
    if (group_size_ < 1) throw DomainError("group_size must be >= 1");
    if (group_size_ > kMaxGroupSize) {
      throw SizeLimitError("group_size exceeds " + std::to_string(kMaxGroupSize));
    }
    std::sort(groups_.begin(), groups_.end(),
              [](const DayGroup& a, const DayGroup& b) { return a.day < b.day; });
    long tested = 0;
    for (std::size_t i = 0; i < groups_.size(); ++i) {
      const auto& g = groups_[i];
      if (g.day < 1) throw DomainError("test day must be >= 1");
      if (g.count < 1) throw DomainError("day group count must be >= 1");
      if (i > 0 && groups_[i - 1].day == g.day) {
        throw DomainError("test days must be pairwise distinct (day " + std::to_string(g.day) +
                          " repeated)");
      }
      tested += g.count;
    }
    if (tested > group_size_) {
      throw DomainError("more persons tested (" + std::to_string(tested) + ") than group size (" +
                        std::to_string(group_size_) + ")");
    }
    tested_ = static_cast<int>(tested);
  }

  int group_size() const noexcept { return group_size_; }
  const std::vector<DayGroup>& groups() const noexcept { return groups_; }
  int tested() const noexcept { return tested_; }
  int untested() const noexcept { return group_size_ - tested_; }
  bool empty() const noexcept { return groups_.empty(); }

  friend bool operator==(const TestSchedule&, const TestSchedule&) = default;

 private:
  int group_size_ = 1;
  std::vector<DayGroup> groups_;
  int tested_ = 0;
};

/// Convenience: N persons tested on a single day.
inline TestSchedule single_day_schedule(int group_size, int day, int tested) {
  if (tested == 0) return TestSchedule(group_size, {});
  return TestSchedule(group_size, {{day, tested}});
}

namespace detail {

inline void require_unit_specificity(const SensitivityCurve& curve) {
  if (curve.specificity() != 1.0) {
    throw UnsupportedModel("only specificity 1 is supported (curve '" + curve.name() +
                           "' has " + std::to_string(curve.specificity()) + ")");
  }
}

inline void require_k_in_range(const TestSchedule& schedule, int k) {
  if (k < 0 || k > schedule.group_size()) {
    throw DomainError("K must lie in [0, M] (got K=" + std::to_string(k) +
                      ", M=" + std::to_string(schedule.group_size()) + ")");
  }
}

// ln[(1 - s)^j], with 0 * ln 0 taken as 0.
inline double log_miss_power(double miss_probability, int j) {
  if (j == 0) return 0.0;
  return j * std::log(miss_probability);
}

}  // namespace detail

/**
 * Direct route: sum over every composition (K_0, ..., K_n) with
 * sum K_d = K and K_d <= N_d, visited in lexicographic order, of
 * C(N_0, K_0) / C(M, K) * prod_d C(N_d, K_d) (1 - s(D_d))^K_d.
 *
 * Cost grows exponentially with the number of day groups; this is the
 * reference the convolution route is checked against.
 */
inline double likelihood_all_negative(const TestSchedule& schedule, int k,
                                      const SensitivityCurve& curve) {
  detail::require_k_in_range(schedule, k);
  detail::require_unit_specificity(curve);
  if (k == 0) return 1.0;

  const auto& groups = schedule.groups();
  std::vector<int> sizes{schedule.untested()};
  std::vector<double> log_miss{0.0};
  for (const auto& g : groups) {
    sizes.push_back(g.count);
    log_miss.push_back(std::log(1.0 - curve.at(g.day)));
  }
  const std::size_t parts = sizes.size();
  // remaining_capacity[i] = sum of sizes[i..]
  std::vector<int> remaining_capacity(parts + 1, 0);
  for (std::size_t i = parts; i-- > 0;) remaining_capacity[i] = remaining_capacity[i + 1] + sizes[i];

  const double log_total = log_binomial(schedule.group_size(), k).value;
  double sum = 0.0;

  // Depth-first over K_0, K_1, ... in increasing order (lexicographic).
  auto visit = [&](auto&& self, std::size_t idx, int left, double log_term) -> void {
    if (idx + 1 == parts) {
      if (left > sizes[idx]) return;
      double t = log_term + log_binomial(sizes[idx], left).value;
      if (idx > 0 && left > 0) t += left * log_miss[idx];
      sum += std::exp(t - log_total);
      return;
    }
    const int lo = std::max(0, left - remaining_capacity[idx + 1]);
    const int hi = std::min(left, sizes[idx]);
    for (int j = lo; j <= hi; ++j) {
      double t = log_term + log_binomial(sizes[idx], j).value;
      if (idx > 0 && j > 0) t += j * log_miss[idx];
      self(self, idx + 1, left - j, t);
    }
  };
  if (k <= remaining_capacity[0]) visit(visit, 0, k, 0.0);
  return sum;
}

/**
 * Convolution route for all K at once. With g_0(x) = sum_j C(N_0, j) x^j and
 * g_d(x) = sum_j C(N_d, j) (1 - s(D_d))^j x^j, entry K of the result is the
 * x^K coefficient of prod_d g_d divided by C(M, K). Coefficients are carried
 * in log space.
 */
inline std::vector<double> likelihood_vector(const TestSchedule& schedule,
                                             const SensitivityCurve& curve) {
  detail::require_unit_specificity(curve);
  const int m = schedule.group_size();

  std::vector<LogWeight> poly(static_cast<std::size_t>(schedule.untested()) + 1);
  for (int j = 0; j <= schedule.untested(); ++j) poly[j] = log_binomial(schedule.untested(), j);

  std::vector<LogWeight> factor;
  std::vector<LogWeight> next;
  std::vector<LogWeight> terms;
  for (const auto& g : schedule.groups()) {
    const double miss = 1.0 - curve.at(g.day);
    factor.assign(static_cast<std::size_t>(g.count) + 1, LogWeight::zero());
    for (int j = 0; j <= g.count; ++j) {
      if (j > 0 && miss == 0.0) break;
      factor[j] = {log_binomial(g.count, j).value + detail::log_miss_power(miss, j)};
    }
    next.assign(poly.size() + factor.size() - 1, LogWeight::zero());
    for (std::size_t i = 0; i < next.size(); ++i) {
      const std::size_t j_lo = i >= poly.size() ? i - poly.size() + 1 : 0;
      const std::size_t j_hi = std::min(i, factor.size() - 1);
      terms.clear();
      for (std::size_t j = j_lo; j <= j_hi; ++j) terms.push_back(poly[i - j] * factor[j]);
      next[i] = log_sum(terms);
    }
    poly.swap(next);
  }

  std::vector<double> out(static_cast<std::size_t>(m) + 1);
  out[0] = 1.0;
  for (int k = 1; k <= m; ++k) out[k] = (poly[k] / log_binomial(m, k)).linear();
  return out;
}

/// Production route for a single K; same value as likelihood_all_negative.
inline double likelihood_all_negative_dp(const TestSchedule& schedule, int k,
                                         const SensitivityCurve& curve) {
  detail::require_k_in_range(schedule, k);
  return likelihood_vector(schedule, curve)[static_cast<std::size_t>(k)];
}

struct PosteriorResult {
  std::vector<double> posterior;   // P(K = k | all tests negative)
  std::vector<double> likelihood;  // P(all tests negative | K = k)
  double p0 = 0.0;
  double prior_p0 = 0.0;
  LogWeight log_evidence;          // ln sum_k P(neg | K = k) P(K = k)
  TestSchedule schedule;
};

/// Bayes update of the prior with the all-negative test record.
inline PosteriorResult posterior(const FittedPrior& prior, const TestSchedule& schedule,
                                 const SensitivityCurve& curve) {
  if (prior.group_size != schedule.group_size()) {
    throw ConfigError("group_size_mismatch",
                      "prior group size " + std::to_string(prior.group_size) +
                          " differs from schedule group size " +
                          std::to_string(schedule.group_size()));
  }
  if (prior.pmf.size() != static_cast<std::size_t>(prior.group_size) + 1) {
    throw ConfigError("invalid_prior", "prior pmf has wrong length");
  }
  detail::require_unit_specificity(curve);

  PosteriorResult r;
  r.schedule = schedule;
  r.prior_p0 = prior.pmf[0];
  r.likelihood = likelihood_vector(schedule, curve);

  if (schedule.empty()) {
    r.posterior = prior.pmf;
    double total = 0.0;
    for (double p : prior.pmf) total += p;
    r.log_evidence = LogWeight::from_linear(total);
    r.p0 = r.posterior[0];
    return r;
  }

  std::vector<double> joint(prior.pmf.size());
  double evidence = 0.0;
  for (std::size_t k = 0; k < joint.size(); ++k) {
    joint[k] = r.likelihood[k] * prior.pmf[k];
    evidence += joint[k];
  }
  r.log_evidence = LogWeight::from_linear(evidence);
  r.posterior.resize(joint.size());
  for (std::size_t k = 0; k < joint.size(); ++k) r.posterior[k] = joint[k] / evidence;
  r.p0 = r.posterior[0];
  return r;
}

}  // namespace qrisk
