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

#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qrisk/errors.hpp"
#include "qrisk/log_math.hpp"
#include "qrisk/nelder_mead.hpp"

namespace qrisk {

/// Scenario evidence from which a Beta-binomial prior over the number of
/// infected contacts is fitted.
struct PriorSpec {
  int group_size = 1;                   // M, contacts excluding the index case
  double p_any_transmission = 0.5;      // target P(K > 0)
  double mean_given_transmission = 2.0; // target E(K | K > 0)

  void validate() const {
    if (group_size < 1) throw DomainError("group_size must be >= 1");
    if (group_size > kMaxGroupSize) {
      throw SizeLimitError("group_size exceeds " + std::to_string(kMaxGroupSize));
    }
    if (!(p_any_transmission > 0.0 && p_any_transmission < 1.0)) {
      throw DomainError("p_any_transmission must lie in (0, 1)");
    }
    if (!(mean_given_transmission > 1.0 &&
          mean_given_transmission <= static_cast<double>(group_size))) {
      throw DomainError("mean_given_transmission must lie in (1, group_size]");
    }
  }
};

struct FittedPrior {
  int group_size = 0;
  double alpha = 1.0;
  double beta = 1.0;
  std::vector<double> pmf;    // pmf[k] = P(K = k), k = 0..M
  double fit_residual = 0.0;  // sum of squared relative target errors
  bool converged = true;      // fit_residual <= kFitResidualTolerance

  double p0() const { return pmf.at(0); }
};

inline constexpr double kFitResidualTolerance = 1e-8;

/// Thrown by fit_prior when no (alpha, beta) reproduces the targets.
/// Carries the best parameters found so callers can opt into them.
class FitFailed : public Error {
 public:
  explicit FitFailed(FittedPrior best)
      : Error("fit_failed", "prior fit did not reach residual <= 1e-8 (best residual " +
                                std::to_string(best.fit_residual) + ")"),
        best_(std::move(best)) {}

  const FittedPrior& best() const noexcept { return best_; }

 private:
  FittedPrior best_;
};

/// P(K = k) = C(M, k) B(k + alpha, M - k + beta) / B(alpha, beta), k = 0..M.
inline std::vector<double> beta_binomial_pmf(int group_size, double alpha, double beta) {
  if (group_size < 1) throw DomainError("group size must be >= 1");
  if (group_size > kMaxGroupSize) {
    throw SizeLimitError("group size " + std::to_string(group_size) + " exceeds " +
                         std::to_string(kMaxGroupSize));
  }
  if (!(alpha > 0.0) || !(beta > 0.0)) throw DomainError("alpha and beta must be positive");
  const double log_norm = log_beta(alpha, beta).value;
  std::vector<double> pmf(static_cast<std::size_t>(group_size) + 1);
  for (int k = 0; k <= group_size; ++k) {
    const double lw = log_binomial(group_size, k).value +
                      log_beta(k + alpha, group_size - k + beta).value - log_norm;
    pmf[static_cast<std::size_t>(k)] = std::exp(lw);
  }
  return pmf;
}

/// E(K | K > 0) for a probability vector indexed by K.
inline double conditional_mean(std::span<const double> pmf) {
  if (pmf.empty()) throw DomainError("empty probability vector");
  double tail = 0.0;
  double first_moment = 0.0;
  for (std::size_t i = 1; i < pmf.size(); ++i) {
    tail += pmf[i];
    first_moment += static_cast<double>(i) * pmf[i];
  }
  if (!(tail > 0.0)) throw DomainError("degenerate prior: P(K > 0) = 0");
  return first_moment / tail;
}

namespace detail {

struct PriorTargets {
  double p_any;
  double mean_given;
};

// Closed forms: P(K = 0) = B(alpha, M + beta) / B(alpha, beta) and
// E(K) = M alpha / (alpha + beta).
inline PriorTargets closed_form_targets(int m, double alpha, double beta) {
  const double log_p0 = log_beta(alpha, m + beta).value - log_beta(alpha, beta).value;
  const double p_any = -std::expm1(log_p0);
  const double mean = m * alpha / (alpha + beta);
  return {p_any, mean / p_any};
}

inline double relative_residual(const PriorSpec& spec, double p_any, double mean_given) {
  const double r1 = p_any / spec.p_any_transmission - 1.0;
  const double r2 = mean_given / spec.mean_given_transmission - 1.0;
  return r1 * r1 + r2 * r2;
}

inline double pmf_residual(const PriorSpec& spec, const std::vector<double>& pmf) {
  double tail = 0.0;
  for (std::size_t i = 1; i < pmf.size(); ++i) tail += pmf[i];
  return relative_residual(spec, tail, conditional_mean(pmf));
}

}  // namespace detail

/// Start grid for the multi-start fit, over (ln alpha, ln beta), in the
/// order starts are tried. Earlier starts win ties on residual.
inline constexpr std::array<double, 5> kFitStartGrid = {-2.0, -1.0, 0.0, 1.0, 2.0};

/**
 * Fits (alpha, beta) and always returns the best parameters found;
 * `converged` reports whether the residual contract was met.
 *
 * The objective is minimized over (ln alpha, ln beta). The residual stored in
 * the result is recomputed from the materialized pmf.
 */
inline FittedPrior fit_prior_best_effort(const PriorSpec& spec) {
  spec.validate();
  const int m = spec.group_size;
  auto objective = [&](const std::array<double, 2>& x) {
    // Keep exp() well inside double range; the optimum is never out here.
    if (std::abs(x[0]) > 50.0 || std::abs(x[1]) > 50.0) {
      return std::numeric_limits<double>::infinity();
    }
    const auto t = detail::closed_form_targets(m, std::exp(x[0]), std::exp(x[1]));
    const double r = detail::relative_residual(spec, t.p_any, t.mean_given);
    return std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
  };

  SimplexOptions opts;
  SimplexResult<2> best;
  best.value = std::numeric_limits<double>::infinity();
  for (double a0 : kFitStartGrid) {
    for (double b0 : kFitStartGrid) {
      auto run = nelder_mead<2>(objective, {a0, b0}, opts);
      // One restart from the optimum guards against simplex collapse.
      run = nelder_mead<2>(objective, run.x, opts);
      if (run.value < best.value) best = run;
    }
  }

  FittedPrior fit;
  fit.group_size = m;
  fit.alpha = std::exp(best.x[0]);
  fit.beta = std::exp(best.x[1]);
  fit.pmf = beta_binomial_pmf(m, fit.alpha, fit.beta);
  fit.fit_residual = detail::pmf_residual(spec, fit.pmf);
  fit.converged = fit.fit_residual <= kFitResidualTolerance;
  return fit;
}

/// Like fit_prior_best_effort, but a residual above 1e-8 throws FitFailed.
inline FittedPrior fit_prior(const PriorSpec& spec) {
  auto fit = fit_prior_best_effort(spec);
  if (!fit.converged) throw FitFailed(std::move(fit));
  return fit;
}

/// Prior with explicitly given shape parameters (no fitting).
inline FittedPrior make_prior(int group_size, double alpha, double beta) {
  FittedPrior p;
  p.group_size = group_size;
  p.alpha = alpha;
  p.beta = beta;
  p.pmf = beta_binomial_pmf(group_size, alpha, beta);
  p.fit_residual = 0.0;
  p.converged = true;
  return p;
}

}  // namespace qrisk
