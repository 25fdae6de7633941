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

#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>

#include "json.hpp"

#include "qrisk/decision.hpp"
#include "qrisk/evaluate.hpp"
#include "qrisk/sensitivity.hpp"

/**
 * @file json_io.hpp
 *
 * @brief JSON documents shared by the service and the CLI `--json` output.
 *
 * Field order is fixed (ordered_json) and every real number is rounded to
 * 12 significant digits before serialization, so equal inputs give
 * byte-identical output on every platform.
 */

namespace qrisk {

using Json = nlohmann::ordered_json;

/// Rounds to 12 significant digits. The shortest round-trip form of the
/// result never needs more than 12 digits.
inline double round12(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.11e", x);
  double out = 0.0;
  std::from_chars(buf, buf + std::char_traits<char>::length(buf), out);
  return out;
}

inline Json num(double x) {
  if (!std::isfinite(x)) return nullptr;
  return round12(x);
}

inline Json num_array(const std::vector<double>& xs) {
  Json a = Json::array();
  for (double x : xs) a.push_back(num(x));
  return a;
}

inline Json to_json(const TestSchedule& s) {
  Json groups = Json::array();
  for (const auto& g : s.groups()) groups.push_back(Json{{"day", g.day}, {"count", g.count}});
  return Json{{"group_size", s.group_size()},
              {"tested", s.tested()},
              {"untested", s.untested()},
              {"groups", std::move(groups)}};
}

inline Json to_json(const Recommendation& r) {
  Json days = Json::array();
  for (int d : r.rationale.test_days) days.push_back(d);
  return Json{{"action", std::string(to_string(r.action))},
              {"p0", num(r.p0)},
              {"threshold", num(r.threshold)},
              {"rationale",
               Json{{"text", r.rationale.text()},
                    {"p0", num(r.rationale.p0)},
                    {"threshold", num(r.rationale.threshold)},
                    {"tested", r.rationale.tested},
                    {"group_size", r.rationale.group_size},
                    {"test_days", std::move(days)},
                    {"any_positive", r.rationale.any_positive}}}};
}

inline Json to_json(const FittedPrior& p) {
  return Json{{"group_size", p.group_size},
              {"alpha", num(p.alpha)},
              {"beta", num(p.beta)},
              {"fit_residual", num(p.fit_residual)},
              {"converged", p.converged},
              {"p_zero", num(p.pmf.at(0))}};
}

inline Json to_json(const CohortReport& c) {
  Json excluded = Json::array();
  for (const auto& e : c.excluded) excluded.push_back(Json{{"case_id", e.case_id}, {"reason", e.reason}});
  Json warnings = Json::array();
  for (const auto& w : c.warnings) warnings.push_back(w);
  return Json{{"event_date", to_iso(c.event_date)},
              {"included", static_cast<int>(c.included.size())},
              {"untested_count", c.untested_count},
              {"positive_count", c.positive_count},
              {"any_positive", c.any_positive},
              {"excluded", std::move(excluded)},
              {"warnings", std::move(warnings)}};
}

inline Json to_json(const SensitivityCurve& c) {
  Json pts = Json::array();
  for (const auto& p : c.points()) pts.push_back(Json{{"day", p.day}, {"sensitivity", num(p.sensitivity)}});
  return Json{{"id", c.name()}, {"specificity", num(c.specificity())}, {"points", std::move(pts)}};
}

/// Response body of an evaluation (POST /v1/posterior, `evaluate --json`).
inline Json evaluation_to_json(const Evaluation& ev, const std::string& curve_id) {
  Json prior = to_json(ev.prior);
  prior["p_any_transmission"] = num(ev.targets.p_any_transmission);
  prior["mean_given_transmission"] = num(ev.targets.mean_given_transmission);
  Json body{{"p0", num(ev.result.p0)},
            {"prior_p0", num(ev.result.prior_p0)},
            {"posterior", num_array(ev.result.posterior)},
            {"log_evidence", num(ev.result.log_evidence.value)},
            {"decision", to_json(ev.recommendation)},
            {"schedule", to_json(ev.result.schedule)},
            {"prior", std::move(prior)},
            {"diagnostics",
             Json{{"curve_id", curve_id},
                  {"likelihood", num_array(ev.result.likelihood)},
                  {"fit_status", ev.prior.converged ? "fitted" : "fit_failed_best_effort"}}}};
  if (ev.cohort) body["cohort"] = to_json(*ev.cohort);
  return body;
}

inline std::string dump(const Json& j) { return j.dump(); }

}  // namespace qrisk
