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

#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qrisk/errors.hpp"
#include "qrisk/likelihood.hpp"
#include "qrisk/prior.hpp"
#include "qrisk/sensitivity.hpp"

namespace qrisk {

struct DecisionPolicy {
  double threshold = 0.9;

  void validate() const {
    if (!(threshold > 0.0 && threshold < 1.0)) {
      throw DomainError("decision threshold must lie in (0, 1)");
    }
  }
};

enum class Action { ReleaseQuarantine, ContinueQuarantine, HoldPositiveCase };

inline std::string_view to_string(Action a) {
  switch (a) {
    case Action::ReleaseQuarantine: return "ReleaseQuarantine";
    case Action::ContinueQuarantine: return "ContinueQuarantine";
    case Action::HoldPositiveCase: return "HoldPositiveCase";
  }
  return "ContinueQuarantine";
}

struct Rationale {
  double p0 = 0.0;
  double threshold = 0.0;
  int tested = 0;
  int group_size = 0;
  std::vector<int> test_days;
  bool any_positive = false;

  std::string text() const {
    std::ostringstream os;
    os.precision(12);
    if (any_positive) {
      os << "a positive test was recorded; group quarantine cannot be released";
    } else {
      os << "p0=" << p0 << (p0 > threshold ? " > " : " <= ") << "threshold=" << threshold;
    }
    os << "; " << tested << " of " << group_size << " contacts tested negative";
    if (!test_days.empty()) {
      os << " on day";
      if (test_days.size() > 1) os << 's';
      for (std::size_t i = 0; i < test_days.size(); ++i) os << (i ? "," : " ") << test_days[i];
    }
    return os.str();
  }
};

struct Recommendation {
  Action action = Action::ContinueQuarantine;
  double p0 = 0.0;
  double threshold = 0.9;
  Rationale rationale;
};

/// Release only when no positive was recorded and p0 is strictly above the
/// threshold.
inline Recommendation decide(const PosteriorResult& result, const DecisionPolicy& policy,
                             bool any_positive) {
  Recommendation rec;
  rec.p0 = result.p0;
  rec.threshold = policy.threshold;
  if (any_positive) {
    rec.action = Action::HoldPositiveCase;
  } else if (result.p0 > policy.threshold) {
    rec.action = Action::ReleaseQuarantine;
  } else {
    rec.action = Action::ContinueQuarantine;
  }
  rec.rationale.p0 = result.p0;
  rec.rationale.threshold = policy.threshold;
  rec.rationale.tested = result.schedule.tested();
  rec.rationale.group_size = result.schedule.group_size();
  for (const auto& g : result.schedule.groups()) rec.rationale.test_days.push_back(g.day);
  rec.rationale.any_positive = any_positive;
  return rec;
}

/// Smallest N in 0..M such that N same-day negative tests on `day` give
/// p0 > threshold, or nullopt when even N = M does not. Linear scan: p0 is
/// not assumed monotone in N.
inline std::optional<int> min_tests_for_release(const FittedPrior& prior, int day,
                                                const SensitivityCurve& curve,
                                                const DecisionPolicy& policy) {
  policy.validate();
  for (int n = 0; n <= prior.group_size; ++n) {
    const auto r = posterior(prior, single_day_schedule(prior.group_size, day, n), curve);
    if (r.p0 > policy.threshold) return n;
  }
  return std::nullopt;
}

struct SurfaceCell {
  int tested = 0;
  double p0 = 0.0;
  bool release = false;
};

enum class FitStatus { Fitted, FitFailed, FitFailedBestEffort };

inline std::string_view to_string(FitStatus s) {
  switch (s) {
    case FitStatus::Fitted: return "fitted";
    case FitStatus::FitFailed: return "fit_failed";
    case FitStatus::FitFailedBestEffort: return "fit_failed_best_effort";
  }
  return "fit_failed";
}

struct SurfaceRow {
  int group_size = 0;
  FitStatus status = FitStatus::Fitted;
  double alpha = 0.0;
  double beta = 0.0;
  double fit_residual = 0.0;
  double prior_p0 = 0.0;
  std::vector<SurfaceCell> cells;  // N = 0..M; empty when the fit failed
};

/**
 * p0 over the (M, N) grid for single-day testing on `day`, rows in the order
 * of `specs`. A failed fit never aborts the sweep: the row is annotated and
 * left empty unless `best_effort_on_failure` asks for the best parameters to
 * be used anyway.
 */
inline std::vector<SurfaceRow> posterior_surface(const std::vector<PriorSpec>& specs, int day,
                                                 const SensitivityCurve& curve,
                                                 const DecisionPolicy& policy,
                                                 bool best_effort_on_failure = false) {
  policy.validate();
  std::vector<SurfaceRow> rows;
  rows.reserve(specs.size());
  for (const auto& spec : specs) {
    SurfaceRow row;
    row.group_size = spec.group_size;
    const auto prior = fit_prior_best_effort(spec);
    row.alpha = prior.alpha;
    row.beta = prior.beta;
    row.fit_residual = prior.fit_residual;
    row.prior_p0 = prior.pmf[0];
    if (!prior.converged) {
      row.status = best_effort_on_failure ? FitStatus::FitFailedBestEffort : FitStatus::FitFailed;
    }
    if (prior.converged || best_effort_on_failure) {
      for (int n = 0; n <= spec.group_size; ++n) {
        const auto r = posterior(prior, single_day_schedule(spec.group_size, day, n), curve);
        row.cells.push_back({n, r.p0, r.p0 > policy.threshold});
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace qrisk
