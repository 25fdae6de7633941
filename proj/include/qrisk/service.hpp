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
#include <string_view>
#include <utility>

#include "json.hpp"

#include "qrisk/cohort.hpp"
#include "qrisk/decision.hpp"
#include "qrisk/errors.hpp"
#include "qrisk/evaluate.hpp"
#include "qrisk/json_io.hpp"
#include "qrisk/store.hpp"

/**
 * @file service.hpp
 *
 * @brief Transport-independent JSON API. `Service::handle` maps a method,
 * path and body to a status and body; tools/qrisk_server.cpp binds it to
 * HTTP.
 *
 * Every 4xx body is {"code", "message", "field_path"?}. Computation
 * endpoints never write to the store.
 */

namespace qrisk {

struct ServiceConfig {
  double default_threshold = 0.9;
};

struct HttpResponse {
  int status = 200;
  std::string body;
};

namespace detail {

// A request-level problem that maps directly onto an HTTP error.
struct ApiError {
  int status;
  std::string code;
  std::string message;
  std::string field_path;
  Json extra = nullptr;
};

inline HttpResponse error_response(const ApiError& e) {
  Json body{{"code", e.code}, {"message", e.message}};
  if (!e.field_path.empty()) body["field_path"] = e.field_path;
  if (!e.extra.is_null()) {
    for (auto it = e.extra.begin(); it != e.extra.end(); ++it) body[it.key()] = it.value();
  }
  return {e.status, body.dump()};
}

inline ApiError schema_error(const std::string& field, const std::string& message) {
  return {400, "invalid_request", message, field};
}

inline const nlohmann::json* optional_field(const nlohmann::json& body, const char* name) {
  const auto it = body.find(name);
  if (it == body.end() || it->is_null()) return nullptr;
  return &*it;
}

inline double number_field(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number()) throw schema_error(path, path + " must be a number");
  return v.get<double>();
}

inline int integer_field(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number_integer()) throw schema_error(path, path + " must be an integer");
  const auto x = v.get<long long>();
  if (x < -1000000000LL || x > 1000000000LL) throw schema_error(path, path + " out of range");
  return static_cast<int>(x);
}

inline bool bool_field(const nlohmann::json& body, const char* name) {
  const auto* v = optional_field(body, name);
  if (!v) return false;
  if (!v->is_boolean()) throw schema_error(std::string("/") + name, std::string("/") + name + " must be a boolean");
  return v->get<bool>();
}

inline std::string string_field(const nlohmann::json& v, const std::string& path) {
  if (!v.is_string()) throw schema_error(path, path + " must be a string");
  return v.get<std::string>();
}

inline void check_threshold(double t, const std::string& path) {
  if (!(t > 0.0 && t < 1.0)) throw ApiError{400, "invalid_threshold", "threshold must lie in (0, 1)", path};
}

}  // namespace detail

class Service {
 public:
  Service(ScenarioStore& scenarios, const CurveStore& curves, ServiceConfig config = {})
      : scenarios_(scenarios), curves_(curves), config_(config) {}

  HttpResponse handle(std::string_view method, std::string_view path, std::string_view body) {
    try {
      return route(method, path, body);
    } catch (const detail::ApiError& e) {
      return detail::error_response(e);
    } catch (const FitFailed& e) {
      const auto& best = e.best();
      return detail::error_response({422, e.code(), e.what(), "",
                                     Json{{"best", Json{{"alpha", num(best.alpha)},
                                                        {"beta", num(best.beta)},
                                                        {"fit_residual", num(best.fit_residual)}}}}});
    } catch (const ValidationError& e) {
      Json extra = nullptr;
      if (!e.case_id().empty()) extra = Json{{"case_id", e.case_id()}};
      return detail::error_response({422, e.code(), e.what(), "", extra});
    } catch (const ParseError& e) {
      return detail::error_response({400, "invalid_cohort_csv", e.what(), "/cohort_csv"});
    } catch (const VersionConflict& e) {
      return detail::error_response({409, e.code(), e.what(), "/version"});
    } catch (const Error& e) {
      return detail::error_response({422, e.code(), e.what(), ""});
    } catch (const nlohmann::json::exception& e) {
      return detail::error_response({400, "invalid_request", e.what(), ""});
    } catch (const std::exception& e) {
      return detail::error_response({500, "internal_error", e.what(), ""});
    }
  }

 private:
  HttpResponse route(std::string_view method, std::string_view path, std::string_view body) {
    constexpr std::string_view kScenarios = "/v1/scenarios";
    constexpr std::string_view kCurves = "/v1/curves";
    if (path == "/v1/posterior") {
      require_method(method, "POST");
      return {200, posterior_endpoint(parse_body(body)).dump()};
    }
    if (path == "/v1/what-if/min-tests") {
      require_method(method, "POST");
      return {200, min_tests_endpoint(parse_body(body)).dump()};
    }
    if (path == kScenarios) {
      require_method(method, "GET");
      Json list = Json::array();
      for (const auto& p : scenarios_.list()) list.push_back(to_json(p));
      return {200, Json{{"scenarios", std::move(list)}}.dump()};
    }
    if (path.starts_with(kScenarios) && path.size() > kScenarios.size() + 1 &&
        path[kScenarios.size()] == '/') {
      const std::string id(path.substr(kScenarios.size() + 1));
      if (!valid_store_id(id)) throw detail::ApiError{400, "invalid_id", "invalid scenario id", ""};
      if (method == "GET") {
        const auto p = scenarios_.get(id);
        if (!p) throw not_found("scenario_not_found", "unknown scenario '" + id + "'");
        return {200, to_json(*p).dump()};
      }
      require_method(method, "PUT");
      return {200, put_scenario(id, parse_body(body)).dump()};
    }
    if (path == kCurves) {
      require_method(method, "GET");
      Json list = Json::array();
      for (const auto& id : curves_.ids()) {
        if (const auto c = curves_.get(id)) {
          list.push_back(Json{{"id", id},
                              {"points", static_cast<int>(c->points().size())},
                              {"specificity", num(c->specificity())}});
        }
      }
      return {200, Json{{"curves", std::move(list)}}.dump()};
    }
    if (path.starts_with(kCurves) && path.size() > kCurves.size() + 1 && path[kCurves.size()] == '/') {
      require_method(method, "GET");
      const std::string id(path.substr(kCurves.size() + 1));
      return {200, to_json(curve_or_404(id)).dump()};
    }
    throw not_found("not_found", "no such endpoint");
  }

  static detail::ApiError not_found(std::string code, std::string message, std::string field = {}) {
    return {404, std::move(code), std::move(message), std::move(field)};
  }

  static void require_method(std::string_view actual, std::string_view expected) {
    if (actual != expected) {
      throw detail::ApiError{405, "method_not_allowed", "use " + std::string(expected), ""};
    }
  }

  static nlohmann::json parse_body(std::string_view body) {
    auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded()) throw detail::ApiError{400, "invalid_json", "request body is not valid JSON", ""};
    if (!j.is_object()) throw detail::schema_error("", "request body must be a JSON object");
    return j;
  }

  SensitivityCurve curve_or_404(const std::string& id, const std::string& field = {}) const {
    std::optional<SensitivityCurve> c;
    try {
      c = curves_.get(id);
    } catch (const ParseError& e) {
      throw detail::ApiError{500, "curve_unreadable", e.what(), field};
    }
    if (c) return *c;
    throw not_found("curve_not_found", "unknown curve '" + id + "'", field);
  }

  // Resolves targets, threshold and curve from either a stored scenario or
  // explicit prior targets in the body.
  struct Resolved {
    ScenarioTargets targets;
    double threshold;
    SensitivityCurve curve;
    std::string curve_id;
  };

  Resolved resolve(const nlohmann::json& body) const {
    std::optional<ScenarioPreset> preset;
    ScenarioTargets targets;
    if (const auto* sid = detail::optional_field(body, "scenario_id")) {
      const auto id = detail::string_field(*sid, "/scenario_id");
      preset = scenarios_.get(id);
      if (!preset) throw not_found("scenario_not_found", "unknown scenario '" + id + "'", "/scenario_id");
      targets = preset->targets;
    } else if (const auto* prior = detail::optional_field(body, "prior")) {
      if (!prior->is_object()) throw detail::schema_error("/prior", "/prior must be an object");
      targets.p_any_transmission =
          detail::number_field(prior->value("p_any_transmission", nlohmann::json()), "/prior/p_any_transmission");
      targets.mean_given_transmission = detail::number_field(
          prior->value("mean_given_transmission", nlohmann::json()), "/prior/mean_given_transmission");
    } else {
      throw detail::schema_error("/scenario_id", "either scenario_id or prior is required");
    }

    double threshold = preset ? preset->threshold : config_.default_threshold;
    if (const auto* t = detail::optional_field(body, "threshold")) {
      threshold = detail::number_field(*t, "/threshold");
    }
    detail::check_threshold(threshold, "/threshold");

    std::string curve_id = preset ? preset->curve_id : std::string(kDefaultCurveId);
    if (const auto* c = detail::optional_field(body, "curve_id")) {
      curve_id = detail::string_field(*c, "/curve_id");
    }
    auto curve = curve_or_404(curve_id, "/curve_id");
    return {targets, threshold, std::move(curve), curve_id};
  }

  Json posterior_endpoint(const nlohmann::json& body) const {
    auto resolved = resolve(body);
    EvaluationRequest req;
    req.targets = resolved.targets;
    req.policy.threshold = resolved.threshold;
    req.allow_fit_failure = detail::bool_field(body, "allow_fit_failure");

    const auto* group_size = detail::optional_field(body, "group_size");
    std::optional<int> m;
    if (group_size) m = detail::integer_field(*group_size, "/group_size");
    if (m && (*m < 1 || *m > kMaxGroupSize)) {
      throw detail::schema_error("/group_size", "/group_size must lie in [1, 1000]");
    }

    if (const auto* csv = detail::optional_field(body, "cohort_csv")) {
      req.data = parse_cohort_csv(detail::string_field(*csv, "/cohort_csv"));
      if (const auto* ed = detail::optional_field(body, "event_date")) {
        const auto parsed = parse_date(detail::string_field(*ed, "/event_date"));
        if (!parsed) throw detail::schema_error("/event_date", "/event_date is not a date");
        req.event_date = *parsed;
      }
    } else if (const auto* sched = detail::optional_field(body, "schedule")) {
      if (!m) throw detail::schema_error("/group_size", "group_size is required with a schedule");
      if (!sched->is_array()) throw detail::schema_error("/schedule", "/schedule must be an array");
      std::vector<DayGroup> groups;
      for (std::size_t i = 0; i < sched->size(); ++i) {
        const auto& g = (*sched)[i];
        const std::string at = "/schedule/" + std::to_string(i);
        if (!g.is_object()) throw detail::schema_error(at, at + " must be an object");
        groups.push_back({detail::integer_field(g.value("day", nlohmann::json()), at + "/day"),
                          detail::integer_field(g.value("count", nlohmann::json()), at + "/count")});
      }
      try {
        req.data = TestSchedule(*m, std::move(groups));
      } catch (const DomainError& e) {
        throw detail::ApiError{400, "invalid_schedule", e.what(), "/schedule"};
      }
      req.any_positive = detail::bool_field(body, "any_positive");
    } else {
      throw detail::schema_error("/schedule", "either schedule or cohort_csv is required");
    }

    const auto ev = evaluate(req, resolved.curve);
    if (ev.cohort && m && *m != ev.cohort->schedule.group_size()) {
      throw detail::ApiError{422, "group_size_mismatch",
                             "group_size " + std::to_string(*m) + " differs from the " +
                                 std::to_string(ev.cohort->schedule.group_size()) +
                                 " contacts included from the cohort",
                             "/group_size"};
    }
    return evaluation_to_json(ev, resolved.curve_id);
  }

  Json min_tests_endpoint(const nlohmann::json& body) const {
    auto resolved = resolve(body);
    const auto* gs = detail::optional_field(body, "group_size");
    if (!gs) throw detail::schema_error("/group_size", "group_size is required");
    const int m = detail::integer_field(*gs, "/group_size");
    if (m < 1 || m > kMaxGroupSize) throw detail::schema_error("/group_size", "/group_size must lie in [1, 1000]");
    const auto* d = detail::optional_field(body, "day");
    if (!d) throw detail::schema_error("/day", "day is required");
    const int day = detail::integer_field(*d, "/day");
    if (day < 1) throw detail::schema_error("/day", "/day must be >= 1");

    const PriorSpec spec{m, resolved.targets.p_any_transmission, resolved.targets.mean_given_transmission};
    const auto prior =
        detail::bool_field(body, "allow_fit_failure") ? fit_prior_best_effort(spec) : fit_prior(spec);
    const DecisionPolicy policy{resolved.threshold};
    const auto n = min_tests_for_release(prior, day, resolved.curve, policy);

    Json out;
    if (n) {
      out["min_tests"] = *n;
      out["fraction_of_group"] = num(static_cast<double>(*n) / m);
    } else {
      out["min_tests"] = nullptr;
      out["fraction_of_group"] = nullptr;
      out["reason"] = "not_achievable";
    }
    out["group_size"] = m;
    out["day"] = day;
    out["threshold"] = num(resolved.threshold);
    out["prior_p0"] = num(prior.pmf[0]);
    out["curve_id"] = resolved.curve_id;
    return out;
  }

  Json put_scenario(const std::string& id, const nlohmann::json& body) {
    ScenarioPreset p;
    p.id = id;
    const auto* name = detail::optional_field(body, "name");
    p.name = name ? detail::string_field(*name, "/name") : id;
    const auto* pa = detail::optional_field(body, "p_any_transmission");
    if (!pa) throw detail::schema_error("/p_any_transmission", "p_any_transmission is required");
    p.targets.p_any_transmission = detail::number_field(*pa, "/p_any_transmission");
    const auto* mg = detail::optional_field(body, "mean_given_transmission");
    if (!mg) throw detail::schema_error("/mean_given_transmission", "mean_given_transmission is required");
    p.targets.mean_given_transmission = detail::number_field(*mg, "/mean_given_transmission");
    if (const auto* c = detail::optional_field(body, "curve_id")) p.curve_id = detail::string_field(*c, "/curve_id");
    if (const auto* t = detail::optional_field(body, "threshold")) p.threshold = detail::number_field(*t, "/threshold");
    long expected = 0;
    if (const auto* v = detail::optional_field(body, "version")) expected = detail::integer_field(*v, "/version");

    if (const auto problem = check_preset(p)) {
      throw detail::ApiError{400, problem->code, problem->message, problem->field_path};
    }
    curve_or_404(p.curve_id, "/curve_id");
    return to_json(scenarios_.put(std::move(p), expected));
  }

  ScenarioStore& scenarios_;
  const CurveStore& curves_;
  ServiceConfig config_;
};

}  // namespace qrisk
