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
#include <string>
#include <variant>

#include "qrisk/cohort.hpp"
#include "qrisk/decision.hpp"
#include "qrisk/likelihood.hpp"
#include "qrisk/prior.hpp"
#include "qrisk/sensitivity.hpp"

namespace qrisk {

/// Prior targets without the group size; M comes from the cohort/schedule.
struct ScenarioTargets {
  double p_any_transmission = 3.0 / 21.0;
  double mean_given_transmission = 4.8;
};

/// Everything needed for one end-to-end evaluation. Exactly one of
/// `schedule` or `cohort` is used.
struct EvaluationRequest {
  ScenarioTargets targets;
  std::variant<TestSchedule, std::vector<CohortRecord>> data;
  std::optional<Date> event_date;  // cohort input only
  bool any_positive = false;       // schedule input only
  DecisionPolicy policy;
  bool allow_fit_failure = false;
};

struct Evaluation {
  FittedPrior prior;
  ScenarioTargets targets;
  PosteriorResult result;
  Recommendation recommendation;
  std::optional<CohortReport> cohort;
};

/// Fit, update and decide. Throws FitFailed unless `allow_fit_failure`.
inline Evaluation evaluate(const EvaluationRequest& req, const SensitivityCurve& curve) {
  req.policy.validate();
  Evaluation ev;
  ev.targets = req.targets;
  TestSchedule schedule;
  bool any_positive = req.any_positive;
  if (const auto* records = std::get_if<std::vector<CohortRecord>>(&req.data)) {
    ev.cohort = ingest(*records, req.event_date);
    schedule = ev.cohort->schedule;
    any_positive = ev.cohort->any_positive;
  } else {
    schedule = std::get<TestSchedule>(req.data);
  }
  const PriorSpec spec{schedule.group_size(), req.targets.p_any_transmission,
                       req.targets.mean_given_transmission};
  ev.prior = req.allow_fit_failure ? fit_prior_best_effort(spec) : fit_prior(spec);
  ev.result = posterior(ev.prior, schedule, curve);
  ev.recommendation = decide(ev.result, req.policy, any_positive);
  return ev;
}

}  // namespace qrisk
