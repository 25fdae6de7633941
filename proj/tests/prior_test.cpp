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
#include <cstring>
#include <numeric>
#include <random>

#include <boost/multiprecision/cpp_int.hpp>

#include "gtest/gtest.h"

#include "qrisk/prior.hpp"

namespace qrisk {
namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

cpp_int factorial(int n) {
  cpp_int r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// B(a, b) for positive integers, exactly.
cpp_rational beta_exact(int a, int b) {
  return cpp_rational(factorial(a - 1) * factorial(b - 1), factorial(a + b - 1));
}

cpp_rational binomial_exact(int n, int k) {
  return cpp_rational(factorial(n), factorial(k) * factorial(n - k));
}

TEST(BetaBinomialPmf, UniformWhenAlphaBetaOne) {
  const auto pmf = beta_binomial_pmf(4, 1.0, 1.0);
  ASSERT_EQ(pmf.size(), 5u);
  for (double p : pmf) EXPECT_NEAR(p, 0.2, 1e-15);
  for (int m = 1; m <= 100; ++m) {
    for (double p : beta_binomial_pmf(m, 1.0, 1.0)) EXPECT_NEAR(p, 1.0 / (m + 1), 1e-12);
  }
}

TEST(BetaBinomialPmf, HandEvaluated) {
  const auto pmf = beta_binomial_pmf(2, 2.0, 2.0);
  EXPECT_NEAR(pmf[0], 0.3, 1e-15);
  EXPECT_NEAR(pmf[1], 0.4, 1e-15);
  EXPECT_NEAR(pmf[2], 0.3, 1e-15);
}

TEST(BetaBinomialPmf, MatchesRationalArithmetic) {
  for (int m = 1; m <= 10; ++m) {
    for (int a = 1; a <= 5; ++a) {
      for (int b = 1; b <= 5; ++b) {
        const auto pmf = beta_binomial_pmf(m, a, b);
        for (int k = 0; k <= m; ++k) {
          const cpp_rational exact = binomial_exact(m, k) * beta_exact(k + a, m - k + b) / beta_exact(a, b);
          EXPECT_NEAR(pmf[k], static_cast<double>(exact), 1e-12) << m << " " << a << " " << b << " " << k;
        }
      }
    }
  }
}

TEST(BetaBinomialPmf, Normalized) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> logu(-4.0, 4.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 1000);
    const auto pmf = beta_binomial_pmf(m, std::exp(logu(rng)), std::exp(logu(rng)));
    double total = 0.0;
    for (double p : pmf) {
      EXPECT_GE(p, 0.0);
      total += p;
    }
    EXPECT_NEAR(total, 1.0, 1e-10) << "M=" << m;
  }
}

TEST(BetaBinomialPmf, Guards) {
  EXPECT_THROW(beta_binomial_pmf(1001, 1.0, 1.0), SizeLimitError);
  EXPECT_THROW(beta_binomial_pmf(0, 1.0, 1.0), DomainError);
  EXPECT_THROW(beta_binomial_pmf(5, 0.0, 1.0), DomainError);
}

TEST(ConditionalMean, Examples) {
  const double uniform[] = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  EXPECT_NEAR(conditional_mean(uniform), 1.5, 1e-15);
  const double split[] = {0.5, 0.0, 0.5};
  EXPECT_DOUBLE_EQ(conditional_mean(split), 2.0);
  const double degenerate[] = {1.0, 0.0, 0.0};
  EXPECT_THROW(conditional_mean(degenerate), DomainError);
}

const PriorSpec kSchool25{25, 3.0 / 21.0, 4.8};

TEST(FitPrior, SchoolClassTargets) {
  const auto fit = fit_prior(kSchool25);
  EXPECT_TRUE(fit.converged);
  EXPECT_LE(fit.fit_residual, 1e-8);
  const double p_any = 1.0 - fit.pmf[0];
  EXPECT_NEAR(p_any, 0.142857, 1e-3);
  EXPECT_NEAR(conditional_mean(fit.pmf), 4.8, 1e-3);
  EXPECT_NEAR(fit.pmf[0], 0.857, 1e-3);
}

TEST(FitPrior, ConstructedUniformCase) {
  // alpha = beta = 1 on M = 4 gives P(K>0) = 0.8 and E(K|K>0) = 2.5 exactly.
  const auto fit = fit_prior({4, 0.8, 2.5});
  EXPECT_LE(fit.fit_residual, 1e-8);
  EXPECT_NEAR(fit.alpha, 1.0, 1e-3);
  EXPECT_NEAR(fit.beta, 1.0, 1e-3);
  for (double p : fit.pmf) EXPECT_NEAR(p, 0.2, 1e-5);
}

TEST(FitPrior, SmallSchoolClassesStillHaveExactSolutions) {
  // The Beta-binomial family reaches both school targets for M = 13 and 14;
  // the fit reports success there.
  for (int m : {13, 14}) {
    const auto fit = fit_prior_best_effort({m, 3.0 / 21.0, 4.8});
    EXPECT_TRUE(fit.converged) << "M=" << m;
    EXPECT_NEAR(1.0 - fit.pmf[0], 3.0 / 21.0, 1e-6);
    EXPECT_NEAR(conditional_mean(fit.pmf), 4.8, 1e-5);
  }
}

TEST(FitPrior, InfeasibleTargetsFail) {
  // A conditional mean this close to 1 with P(K>0) = 0.9 would need less
  // dispersion than the binomial limit of the family allows.
  const PriorSpec spec{25, 0.9, 1.05};
  try {
    fit_prior(spec);
    FAIL() << "expected FitFailed";
  } catch (const FitFailed& e) {
    EXPECT_EQ(e.code(), "fit_failed");
    EXPECT_GT(e.best().fit_residual, 1e-8);
    EXPECT_FALSE(e.best().converged);
    EXPECT_EQ(e.best().pmf.size(), 26u);
  }
  const auto best = fit_prior_best_effort(spec);
  EXPECT_FALSE(best.converged);
  EXPECT_GT(best.fit_residual, 1e-3);
}

TEST(FitPrior, Deterministic) {
  const auto a = fit_prior(kSchool25);
  const auto b = fit_prior(kSchool25);
  EXPECT_EQ(std::memcmp(&a.alpha, &b.alpha, sizeof(double)), 0);
  EXPECT_EQ(std::memcmp(&a.beta, &b.beta, sizeof(double)), 0);
  EXPECT_EQ(a.pmf, b.pmf);
}

TEST(FitPrior, RecomputedTargetsWithinResidual) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int fitted = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int m = 2 + static_cast<int>(rng() % 60);
    const double p = 0.02 + 0.9 * u(rng);
    const double mean = 1.0 + (m - 1.0) * (0.05 + 0.9 * u(rng));
    const PriorSpec spec{m, p, mean};
    const auto fit = fit_prior_best_effort(spec);
    double total = 0.0;
    for (double x : fit.pmf) total += x;
    EXPECT_NEAR(total, 1.0, 1e-10);
    if (!fit.converged) continue;
    ++fitted;
    const double tol = std::sqrt(fit.fit_residual) + 1e-12;
    EXPECT_LE(std::abs((1.0 - fit.pmf[0]) / p - 1.0), tol);
    EXPECT_LE(std::abs(conditional_mean(fit.pmf) / mean - 1.0), tol);
  }
  EXPECT_GT(fitted, 10);
}

TEST(PriorSpec, Validation) {
  EXPECT_THROW(fit_prior({0, 0.5, 2.0}), DomainError);
  EXPECT_THROW(fit_prior({10, 0.0, 2.0}), DomainError);
  EXPECT_THROW(fit_prior({10, 1.0, 2.0}), DomainError);
  EXPECT_THROW(fit_prior({10, 0.5, 1.0}), DomainError);
  EXPECT_THROW(fit_prior({10, 0.5, 10.5}), DomainError);
  EXPECT_THROW(fit_prior({1001, 0.5, 2.0}), SizeLimitError);
}

}  // namespace
}  // namespace qrisk
