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

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <random>

#include "gtest/gtest.h"

#include "qrisk/likelihood.hpp"
#include "qrisk/prior.hpp"

namespace qrisk {
namespace {

SensitivityCurve constant_curve(double s) { return SensitivityCurve("const", {{1, s}}); }

// Independent oracle: average over every K-subset of labelled persons of the
// probability that all infected tested persons test negative.
double subset_oracle(const TestSchedule& schedule, int k, const SensitivityCurve& curve) {
  std::vector<double> miss;  // per person; 1 for untested
  for (const auto& g : schedule.groups()) {
    for (int i = 0; i < g.count; ++i) miss.push_back(1.0 - curve.at(g.day));
  }
  miss.resize(static_cast<std::size_t>(schedule.group_size()), 1.0);
  const unsigned m = static_cast<unsigned>(miss.size());
  double sum = 0.0;
  long subsets = 0;
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    if (std::popcount(mask) != k) continue;
    double p = 1.0;
    for (unsigned i = 0; i < m; ++i) {
      if (mask & (1u << i)) p *= miss[i];
    }
    sum += p;
    ++subsets;
  }
  return sum / static_cast<double>(subsets);
}

TestSchedule random_schedule(std::mt19937& rng, int max_m, int max_groups) {
  const int m = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_m));
  const int groups = static_cast<int>(rng() % static_cast<unsigned>(max_groups + 1));
  std::vector<int> days(21);
  for (int i = 0; i < 21; ++i) days[i] = i + 1;
  std::shuffle(days.begin(), days.end(), rng);
  std::vector<DayGroup> out;
  int left = m;
  for (int g = 0; g < groups && left > 0; ++g) {
    const int count = 1 + static_cast<int>(rng() % static_cast<unsigned>(left));
    out.push_back({days[g], count});
    left -= count;
  }
  return TestSchedule(m, out);
}

TEST(Likelihood, TwoPersonExamples) {
  const auto curve = constant_curve(0.75);
  const TestSchedule s(2, {{5, 1}});
  EXPECT_NEAR(likelihood_all_negative(s, 1, curve), 0.625, 1e-15);
  EXPECT_NEAR(likelihood_all_negative(s, 2, curve), 0.25, 1e-15);
  EXPECT_EQ(likelihood_all_negative(s, 0, curve), 1.0);
  EXPECT_NEAR(likelihood_all_negative_dp(s, 1, curve), 0.625, 1e-15);
  EXPECT_NEAR(likelihood_all_negative_dp(s, 2, curve), 0.25, 1e-15);
  EXPECT_EQ(likelihood_all_negative_dp(s, 0, curve), 1.0);
}

TEST(Likelihood, PerfectSensitivityFullTesting) {
  const auto perfect = constant_curve(1.0);
  const TestSchedule s(6, {{3, 2}, {5, 4}});
  for (int k = 1; k <= 6; ++k) {
    EXPECT_EQ(likelihood_all_negative(s, k, perfect), 0.0);
    EXPECT_EQ(likelihood_all_negative_dp(s, k, perfect), 0.0);
  }
}

TEST(Likelihood, ZeroWhenNoFeasibleComposition) {
  // Everybody tested with perfect sensitivity except nobody: only K=0 survives.
  const TestSchedule s(3, {{2, 3}});
  EXPECT_EQ(likelihood_all_negative(s, 3, constant_curve(1.0)), 0.0);
}

TEST(Likelihood, KZeroIsOneForAnySchedule) {
  std::mt19937 rng(17);
  for (int t = 0; t < 20; ++t) {
    const auto s = random_schedule(rng, 30, 4);
    EXPECT_EQ(likelihood_all_negative(s, 0, default_pcr_curve()), 1.0);
    EXPECT_EQ(likelihood_all_negative_dp(s, 0, default_pcr_curve()), 1.0);
  }
}

TEST(Likelihood, BothRoutesMatchSubsetOracle) {
  std::mt19937 rng(23);
  for (int t = 0; t < 60; ++t) {
    const auto s = random_schedule(rng, 12, 3);
    const auto lv = likelihood_vector(s, default_pcr_curve());
    for (int k = 0; k <= s.group_size(); ++k) {
      const double oracle = subset_oracle(s, k, default_pcr_curve());
      EXPECT_NEAR(likelihood_all_negative(s, k, default_pcr_curve()), oracle, 1e-12);
      EXPECT_NEAR(lv[k], oracle, 1e-12);
    }
  }
}

TEST(Likelihood, DpAgreesWithEnumerationUpTo35) {
  std::mt19937 rng(29);
  for (int t = 0; t < 40; ++t) {
    const auto s = random_schedule(rng, 35, 5);
    const auto lv = likelihood_vector(s, default_pcr_curve());
    for (int k = 0; k <= s.group_size(); ++k) {
      EXPECT_NEAR(lv[k], likelihood_all_negative(s, k, default_pcr_curve()), 1e-12);
    }
  }
}

TEST(Likelihood, DpIsFast) {
  const TestSchedule s(35, {{2, 4}, {4, 5}, {6, 6}, {8, 5}, {10, 5}});
  const auto start = std::chrono::steady_clock::now();
  const double v = likelihood_all_negative_dp(s, 10, default_pcr_curve());
  const auto elapsed = std::chrono::steady_clock::now() - start;
  const double ms = std::chrono::duration<double, std::milli>(elapsed).count();
  EXPECT_GT(v, 0.0);
  EXPECT_LT(ms, 10.0);
}

TEST(Likelihood, Errors) {
  const TestSchedule s(4, {{3, 2}});
  EXPECT_THROW(likelihood_all_negative(s, 5, default_pcr_curve()), DomainError);
  EXPECT_THROW(likelihood_all_negative_dp(s, -1, default_pcr_curve()), DomainError);
  const SensitivityCurve antigen("antigen", {{1, 0.6}}, 0.98);
  EXPECT_THROW(likelihood_all_negative(s, 1, antigen), UnsupportedModel);
  EXPECT_THROW(likelihood_all_negative_dp(s, 1, antigen), UnsupportedModel);
}

TEST(TestSchedule, Validation) {
  EXPECT_THROW(TestSchedule(3, {{2, 4}}), DomainError);
  EXPECT_THROW(TestSchedule(5, {{2, 1}, {2, 1}}), DomainError);
  EXPECT_THROW(TestSchedule(5, {{0, 1}}), DomainError);
  EXPECT_THROW(TestSchedule(5, {{1, 0}}), DomainError);
  EXPECT_THROW(TestSchedule(0, {}), DomainError);
  EXPECT_THROW(TestSchedule(1001, {}), SizeLimitError);
  const TestSchedule s(15, {{10, 1}, {8, 1}, {9, 10}});
  EXPECT_EQ(s.groups().front().day, 8);
  EXPECT_EQ(s.tested(), 12);
  EXPECT_EQ(s.untested(), 3);
}

TEST(Posterior, UniformPriorTwoPersons) {
  const auto prior = make_prior(2, 1.0, 1.0);
  const auto r = posterior(prior, TestSchedule(2, {{5, 1}}), constant_curve(0.75));
  EXPECT_NEAR(r.p0, 1.0 / 1.875, 1e-14);
  EXPECT_NEAR(r.posterior[1], 0.625 / 1.875, 1e-14);
  EXPECT_NEAR(r.posterior[2], 0.25 / 1.875, 1e-14);
  EXPECT_NEAR(r.log_evidence.linear(), 1.875 / 3.0, 1e-14);
  EXPECT_NEAR(r.prior_p0, 1.0 / 3.0, 1e-15);
}

TEST(Posterior, EmptyScheduleReturnsPriorExactly) {
  const auto prior = fit_prior({25, 3.0 / 21.0, 4.8});
  const auto r = posterior(prior, TestSchedule(25, {}), default_pcr_curve());
  EXPECT_EQ(r.posterior, prior.pmf);
  EXPECT_EQ(r.p0, prior.pmf[0]);
}

TEST(Posterior, GroupSizeMismatch) {
  const auto prior = make_prior(4, 1.0, 1.0);
  try {
    posterior(prior, TestSchedule(5, {}), default_pcr_curve());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.code(), "group_size_mismatch");
  }
}

TEST(Posterior, BerlinSchoolClass) {
  const auto prior = fit_prior({15, 3.0 / 21.0, 4.8});
  const auto r = posterior(prior, TestSchedule(15, {{8, 1}, {9, 10}, {10, 1}}), default_pcr_curve());
  EXPECT_NEAR(r.p0, 0.98, 0.01);
}

TEST(Posterior, NormalizationAndPriorFloor) {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> logu(-3.0, 3.0);
  for (int t = 0; t < 100; ++t) {
    const auto s = random_schedule(rng, 40, 4);
    const auto prior = make_prior(s.group_size(), std::exp(logu(rng)), std::exp(logu(rng)));
    const auto r = posterior(prior, s, default_pcr_curve());
    double total = 0.0;
    for (double p : r.posterior) total += p;
    EXPECT_NEAR(total, 1.0, 1e-10);
    EXPECT_GE(r.p0, prior.pmf[0] * (1.0 - 1e-12));
    // strictly above the floor once some K > 0 is both plausible and penalized
    bool informative = false;
    for (int k = 1; k <= s.group_size(); ++k) {
      informative |= r.likelihood[k] < 1.0 - 1e-6 && prior.pmf[k] > 1e-6;
    }
    if (informative && !s.empty()) {
      EXPECT_GT(r.p0, prior.pmf[0]);
    }
  }
}

TEST(Posterior, PermutationInvariantBitExact) {
  std::mt19937 rng(37);
  for (int t = 0; t < 30; ++t) {
    const auto s = random_schedule(rng, 35, 5);
    auto groups = s.groups();
    std::shuffle(groups.begin(), groups.end(), rng);
    const TestSchedule permuted(s.group_size(), groups);
    const auto prior = make_prior(s.group_size(), 0.2, 1.5);
    const auto a = posterior(prior, s, default_pcr_curve());
    const auto b = posterior(prior, permuted, default_pcr_curve());
    ASSERT_EQ(a.posterior.size(), b.posterior.size());
    EXPECT_EQ(std::memcmp(a.posterior.data(), b.posterior.data(), a.posterior.size() * sizeof(double)), 0);
    EXPECT_EQ(std::memcmp(&a.log_evidence.value, &b.log_evidence.value, sizeof(double)), 0);
  }
}

}  // namespace
}  // namespace qrisk
