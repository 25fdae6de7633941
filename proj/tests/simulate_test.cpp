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

#include <cmath>

#include "gtest/gtest.h"

#include "qrisk/likelihood.hpp"
#include "qrisk/simulate.hpp"

namespace qrisk {
namespace {

const SensitivityCurve kThreeQuarters("const", {{1, 0.75}});

TEST(Simulate, TwoPersonCase) {
  const TestSchedule s(2, {{5, 1}});
  const auto mc = simulate_likelihood(s, 1, kThreeQuarters, 100000, 2024);
  EXPECT_LE(std::abs(mc.estimate - 0.625), 3.0 * mc.standard_error);
  EXPECT_GT(mc.standard_error, 0.0);
  EXPECT_EQ(mc.replicates, 100000);
}

TEST(Simulate, DegenerateCasesAreExact) {
  const TestSchedule s(6, {{5, 2}, {7, 4}});
  EXPECT_EQ(simulate_likelihood(s, 0, default_pcr_curve(), 1000, 1).estimate, 1.0);
  const SensitivityCurve perfect("perfect", {{1, 1.0}});
  for (int k = 1; k <= 6; ++k) {
    const auto mc = simulate_likelihood(s, k, perfect, 1000, 1);
    EXPECT_EQ(mc.estimate, 0.0);
    EXPECT_EQ(mc.standard_error, 0.0);
  }
}

TEST(Simulate, SameSeedSameEstimate) {
  const TestSchedule s(12, {{3, 4}, {8, 5}});
  const auto a = simulate_likelihood(s, 5, default_pcr_curve(), 20000, 99);
  const auto b = simulate_likelihood(s, 5, default_pcr_curve(), 20000, 99);
  EXPECT_EQ(a.estimate, b.estimate);
  const auto c = simulate_likelihood(s, 5, default_pcr_curve(), 20000, 100);
  EXPECT_NE(a.estimate, c.estimate);
}

TEST(Simulate, AgreesWithAnalyticLikelihood) {
  const TestSchedule s(10, {{2, 3}, {6, 2}, {12, 4}});
  for (int k = 1; k <= 10; ++k) {
    const double analytic = likelihood_all_negative_dp(s, k, default_pcr_curve());
    const auto mc = simulate_likelihood(s, k, default_pcr_curve(), 100000, 7 + k);
    EXPECT_LE(std::abs(mc.estimate - analytic), 4.0 * mc.standard_error + 1e-12) << "K=" << k;
  }
}

TEST(Simulate, Errors) {
  const TestSchedule s(3, {{2, 1}});
  EXPECT_THROW(simulate_likelihood(s, 1, default_pcr_curve(), 999, 1), DomainError);
  EXPECT_THROW(simulate_likelihood(s, 4, default_pcr_curve(), 1000, 1), DomainError);
  const SensitivityCurve antigen("antigen", {{1, 0.6}}, 0.99);
  EXPECT_THROW(simulate_likelihood(s, 1, antigen, 1000, 1), UnsupportedModel);
}

}  // namespace
}  // namespace qrisk
