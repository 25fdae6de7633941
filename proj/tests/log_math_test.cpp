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
#include <cstdint>

#include "gtest/gtest.h"

#include "qrisk/log_math.hpp"

namespace qrisk {
namespace {

// Exact C(n, k) for n <= 60 via the multiplicative formula on 128-bit ints.
unsigned __int128 exact_binomial(int n, int k) {
  unsigned __int128 r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
  return r;
}

TEST(LogBeta, Examples) {
  EXPECT_EQ(log_beta(1.0, 1.0).value, 0.0);
  EXPECT_NEAR(log_beta(2.0, 3.0).value, std::log(1.0 / 12.0), 1e-14);
  EXPECT_NEAR(log_beta(0.5, 0.5).value, std::log(M_PI), 1e-14);
}

TEST(LogBeta, TwelveDigitsAcrossRange) {
  // Reference values from 40-digit evaluation of ln B(a, b).
  struct Case {
    double a, b, expected;
  };
  const Case cases[] = {
      {1e-6, 1e6, 13.815496165239374},   {100.0, 1e6, -1022.4218002626852},
      {3.7, 1e5, -41.16980184319167},    {1e6, 1e6, -1386300.003362921},
      {0.05, 1.87, 2.9512446758500173},  {12.5, 30.25, -25.99668406637252},
  };
  for (const auto& c : cases) {
    const double got = log_beta(c.a, c.b).value;
    EXPECT_LE(std::abs(got - c.expected), 1e-12 * std::abs(c.expected)) << c.a << "," << c.b;
  }
}

TEST(LogBeta, SymmetricByConstruction) {
  for (double a : {1e-6, 0.3, 1.0, 9.99, 10.0, 47.5, 1e5}) {
    for (double b : {1e-6, 0.7, 2.0, 10.5, 333.0, 1e6}) {
      EXPECT_EQ(log_beta(a, b).value, log_beta(b, a).value);
    }
  }
}

TEST(LogBeta, RejectsNonPositive) {
  EXPECT_THROW(log_beta(0.0, 1.0), DomainError);
  EXPECT_THROW(log_beta(1.0, -2.0), DomainError);
  EXPECT_THROW(log_beta(NAN, 1.0), DomainError);
}

TEST(LogBinomial, Examples) {
  EXPECT_EQ(log_binomial(5, 0).value, 0.0);
  EXPECT_NEAR(log_binomial(4, 2).value, std::log(6.0), 1e-15);
  EXPECT_NEAR(log_binomial(25, 12).value, std::log(5200300.0), 1e-14 * std::log(5200300.0));
  EXPECT_NEAR(log_binomial(1000, 500).value, 689.4672615678512, 1e-12 * 689.4672615678512);
  EXPECT_NEAR(log_binomial(1000, 1).value, 6.907755278982137, 1e-12 * 6.907755278982137);
}

TEST(LogBinomial, MatchesExactIntegers) {
  for (int n = 1; n <= 60; ++n) {
    for (int k = 0; k <= n; ++k) {
      const double exact = std::log(static_cast<double>(exact_binomial(n, k)));
      const double got = log_binomial(n, k).value;
      EXPECT_LE(std::abs(got - exact), 1e-12 * std::max(1.0, std::abs(exact))) << n << "," << k;
    }
  }
}

TEST(LogBinomial, Symmetry) {
  for (int n = 0; n <= 200; ++n) {
    for (int k = 0; k <= n; ++k) {
      EXPECT_NEAR(log_binomial(n, k).value, log_binomial(n, n - k).value, 1e-12);
    }
  }
}

TEST(LogBinomial, Pascal) {
  for (int n = 2; n <= 60; ++n) {
    for (int k = 1; k < n; ++k) {
      const double lhs = log_binomial(n, k).linear();
      const double rhs = log_binomial(n - 1, k - 1).linear() + log_binomial(n - 1, k).linear();
      EXPECT_LE(std::abs(lhs - rhs), 1e-10 * rhs) << n << "," << k;
    }
  }
}

TEST(LogBinomial, RejectsOutOfRange) {
  EXPECT_THROW(log_binomial(3, 4), DomainError);
  EXPECT_THROW(log_binomial(-1, 0), DomainError);
  EXPECT_THROW(log_binomial(3, -1), DomainError);
}

TEST(LogWeight, ZeroIsAbsorbing) {
  const auto z = LogWeight::zero();
  const LogWeight two = LogWeight::from_linear(2.0);
  EXPECT_TRUE((z * two).is_zero());
  EXPECT_TRUE((z / two).is_zero());
  EXPECT_EQ((z + two).value, two.value);
  EXPECT_EQ(z.linear(), 0.0);
  EXPECT_NEAR((two + two).linear(), 4.0, 1e-15);
  const LogWeight terms[] = {z, two, LogWeight::from_linear(3.0)};
  EXPECT_NEAR(log_sum(terms).linear(), 5.0, 1e-14);
  const LogWeight zeros[] = {z, z};
  EXPECT_TRUE(log_sum(zeros).is_zero());
}

}  // namespace
}  // namespace qrisk
