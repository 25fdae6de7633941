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

// qrisk: command-line driver for prior fitting, cohort evaluation, sweeps
// and Monte Carlo validation.
//
// Exit codes: 0 success, 1 usage or I/O error, 2 model-level failure
// (fit failed, release not achievable).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qrisk/json_io.hpp"
#include "qrisk/qrisk.hpp"
#include "qrisk/store.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitModel = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path) {
  auto text = qrisk::read_file(path);
  if (!text) throw UsageError("cannot read '" + path + "'");
  return *text;
}

qrisk::ScenarioPreset resolve_scenario(const std::string& ref, const std::string& store_dir) {
  if (std::filesystem::is_regular_file(ref)) {
    const auto j = nlohmann::json::parse(read_text(ref));
    return qrisk::preset_from_json(j, std::filesystem::path(ref).stem().string());
  }
  const qrisk::ScenarioStore store(store_dir);
  if (auto p = store.get(ref)) return *p;
  throw UsageError("unknown scenario '" + ref + "'");
}

struct CurveChoice {
  qrisk::SensitivityCurve curve;
  std::string id;
};

CurveChoice resolve_curve(const std::string& curve_file, const std::string& curve_id,
                          const std::string& store_dir) {
  if (!curve_file.empty()) {
    const auto id = std::filesystem::path(curve_file).stem().string();
    return {qrisk::load_curve(read_text(curve_file), id), id};
  }
  const qrisk::CurveStore store(store_dir);
  if (auto c = store.get(curve_id)) return {*c, curve_id};
  throw UsageError("unknown curve '" + curve_id + "'");
}

// "8:1,9:10" -> {{8, 1}, {9, 10}}
std::vector<qrisk::DayGroup> parse_schedule(const std::string& text) {
  std::vector<qrisk::DayGroup> groups;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    qrisk::DayGroup g;
    if (colon == std::string::npos ||
        !qrisk::detail::parse_number(std::string_view(item).substr(0, colon), g.day) ||
        !qrisk::detail::parse_number(std::string_view(item).substr(colon + 1), g.count)) {
      throw UsageError("schedule entries must look like DAY:COUNT (got '" + item + "')");
    }
    groups.push_back(g);
  }
  return groups;
}

void print_fit(const qrisk::FittedPrior& fit) {
  std::printf("alpha          %.12g\n", fit.alpha);
  std::printf("beta           %.12g\n", fit.beta);
  std::printf("fit_residual   %.6e\n", fit.fit_residual);
  std::printf("P(K=0)         %.12g\n", fit.pmf[0]);
  std::printf("status         %s\n", fit.converged ? "fitted" : "FitFailed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Posterior risk that no transmission occurred at a group event"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string store_dir;
  app.add_option("--store", store_dir, "Scenario/curve store directory");

  // fit-prior
  auto* fit_cmd = app.add_subcommand("fit-prior", "Fit Beta-binomial prior parameters");
  qrisk::PriorSpec fit_spec;
  bool fit_json = false;
  fit_cmd->add_option("--group-size", fit_spec.group_size, "Number of contacts M")->required();
  fit_cmd->add_option("--p-any", fit_spec.p_any_transmission, "Target P(K>0)")->required();
  fit_cmd->add_option("--mean-given-k", fit_spec.mean_given_transmission, "Target E(K|K>0)")->required();
  fit_cmd->add_flag("--json", fit_json, "JSON output");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a cohort or test schedule");
  std::string cohort_file;
  std::string schedule_text;
  int eval_group_size = 0;
  std::string scenario_ref = std::string(qrisk::kSchoolClassId);
  std::optional<double> threshold;
  std::string curve_file;
  std::string event_date_text;
  bool allow_fit_failure = false;
  bool eval_json = false;
  bool any_positive = false;
  auto* cohort_opt = eval_cmd->add_option("--cohort", cohort_file, "Cohort CSV line list");
  auto* sched_opt = eval_cmd->add_option("--schedule", schedule_text, "Negative tests as DAY:COUNT,...");
  eval_cmd->add_option("--group-size", eval_group_size, "Group size (with --schedule)");
  cohort_opt->excludes(sched_opt);
  eval_cmd->add_option("--scenario", scenario_ref, "Scenario id or preset JSON file");
  eval_cmd->add_option("--threshold", threshold, "Release threshold on p0");
  eval_cmd->add_option("--curve", curve_file, "Sensitivity curve CSV");
  eval_cmd->add_option("--event-date", event_date_text, "Event date (default: modal last contact)");
  eval_cmd->add_flag("--allow-fit-failure", allow_fit_failure, "Proceed with best-effort prior");
  eval_cmd->add_flag("--any-positive", any_positive, "A positive test was recorded (with --schedule)");
  eval_cmd->add_flag("--json", eval_json, "JSON output");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "p0 over a grid of group sizes and test counts");
  std::string m_range = "13:35";
  int sweep_day = 4;
  std::string sweep_scenario = std::string(qrisk::kSchoolClassId);
  std::optional<double> sweep_threshold;
  std::string sweep_curve;
  std::string out_file;
  bool best_effort = false;
  sweep_cmd->add_option("--m-range", m_range, "Group sizes LO:HI (inclusive)");
  sweep_cmd->add_option("--day", sweep_day, "Test day since the event")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--scenario", sweep_scenario, "Scenario id or preset JSON file");
  sweep_cmd->add_option("--threshold", sweep_threshold, "Release threshold on p0");
  sweep_cmd->add_option("--curve", sweep_curve, "Sensitivity curve CSV");
  sweep_cmd->add_option("--out", out_file, "Output CSV (default stdout)");
  sweep_cmd->add_flag("--best-effort", best_effort, "Fill rows whose fit failed with best-effort priors");

  // min-tests
  auto* min_cmd = app.add_subcommand("min-tests", "Minimum same-day negative tests for release");
  std::string min_scenario = std::string(qrisk::kSchoolClassId);
  int min_group_size = 0;
  int min_day = 4;
  std::optional<double> min_threshold;
  std::string min_curve;
  bool min_json = false;
  min_cmd->add_option("--scenario", min_scenario, "Scenario id or preset JSON file");
  min_cmd->add_option("--group-size", min_group_size, "Group size M")->required();
  min_cmd->add_option("--day", min_day, "Test day since the event")->check(CLI::PositiveNumber);
  min_cmd->add_option("--threshold", min_threshold, "Release threshold on p0");
  min_cmd->add_option("--curve", min_curve, "Sensitivity curve CSV");
  min_cmd->add_flag("--json", min_json, "JSON output");

  // validate
  auto* val_cmd = app.add_subcommand("validate", "Compare analytic likelihood with Monte Carlo");
  int val_group_size = 0;
  std::string val_schedule;
  std::optional<int> val_k;
  long replicates = 100000;
  std::uint64_t seed = 1;
  std::string val_curve;
  val_cmd->add_option("--group-size", val_group_size, "Group size M")->required();
  val_cmd->add_option("--schedule", val_schedule, "Negative tests as DAY:COUNT,...");
  val_cmd->add_option("--k", val_k, "Only this number of infected (default: all)");
  val_cmd->add_option("--replicates", replicates, "Monte Carlo replicates");
  val_cmd->add_option("--seed", seed, "Random seed");
  val_cmd->add_option("--curve", val_curve, "Sensitivity curve CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*fit_cmd) {
      const auto fit = qrisk::fit_prior_best_effort(fit_spec);
      if (fit_json) {
        std::cout << qrisk::to_json(fit).dump() << '\n';
      } else {
        print_fit(fit);
      }
      return fit.converged ? kExitOk : kExitModel;
    }

    if (*eval_cmd) {
      const auto preset = resolve_scenario(scenario_ref, store_dir);
      const auto curve = resolve_curve(curve_file, preset.curve_id, store_dir);
      qrisk::EvaluationRequest req;
      req.targets = preset.targets;
      req.policy.threshold = threshold.value_or(preset.threshold);
      req.allow_fit_failure = allow_fit_failure;
      if (!cohort_file.empty()) {
        req.data = qrisk::parse_cohort_csv(read_text(cohort_file));
        if (!event_date_text.empty()) {
          req.event_date = qrisk::parse_date(event_date_text);
          if (!req.event_date) throw UsageError("cannot parse --event-date");
        }
      } else {
        if (eval_group_size < 1) throw UsageError("--group-size is required with --schedule");
        req.data = qrisk::TestSchedule(eval_group_size, parse_schedule(schedule_text));
        req.any_positive = any_positive;
      }
      const auto ev = qrisk::evaluate(req, curve.curve);
      if (eval_json) {
        std::cout << qrisk::evaluation_to_json(ev, curve.id).dump() << '\n';
        return kExitOk;
      }
      std::printf("p0             %.12g\n", ev.result.p0);
      std::printf("prior P(K=0)   %.12g\n", ev.result.prior_p0);
      std::printf("decision       %s\n", std::string(qrisk::to_string(ev.recommendation.action)).c_str());
      std::printf("rationale      %s\n", ev.recommendation.rationale.text().c_str());
      std::printf("group size     %d (%d untested)\n", ev.result.schedule.group_size(),
                  ev.result.schedule.untested());
      for (const auto& g : ev.result.schedule.groups()) {
        std::printf("  day %-3d      %d negative\n", g.day, g.count);
      }
      if (ev.cohort) {
        std::printf("event date     %s\n", qrisk::to_iso(ev.cohort->event_date).c_str());
        std::printf("excluded       %zu\n", ev.cohort->excluded.size());
        for (const auto& x : ev.cohort->excluded) {
          std::printf("  %s: %s\n", x.case_id.c_str(), x.reason.c_str());
        }
        for (const auto& w : ev.cohort->warnings) std::printf("warning: %s\n", w.c_str());
      }
      if (!ev.prior.converged) std::printf("warning: prior fit failed; best-effort parameters used\n");
      return kExitOk;
    }

    if (*sweep_cmd) {
      const auto colon = m_range.find(':');
      int lo = 0;
      int hi = 0;
      if (colon == std::string::npos ||
          !qrisk::detail::parse_number(std::string_view(m_range).substr(0, colon), lo) ||
          !qrisk::detail::parse_number(std::string_view(m_range).substr(colon + 1), hi) || lo < 2 ||
          hi < lo) {
        throw UsageError("--m-range must be LO:HI with 2 <= LO <= HI");
      }
      const auto preset = resolve_scenario(sweep_scenario, store_dir);
      const auto curve = resolve_curve(sweep_curve, preset.curve_id, store_dir);
      std::vector<qrisk::PriorSpec> specs;
      for (int m = lo; m <= hi; ++m) {
        specs.push_back({m, preset.targets.p_any_transmission, preset.targets.mean_given_transmission});
      }
      const qrisk::DecisionPolicy policy{sweep_threshold.value_or(preset.threshold)};
      const auto rows = qrisk::posterior_surface(specs, sweep_day, curve.curve, policy, best_effort);

      std::ofstream file;
      if (!out_file.empty()) {
        file.open(out_file);
        if (!file) throw UsageError("cannot write '" + out_file + "'");
      }
      std::ostream& os = out_file.empty() ? std::cout : file;
      os << "group_size,tested,p0,release,fit_status,fit_residual\n";
      char buf[256];
      for (const auto& row : rows) {
        const auto status = std::string(qrisk::to_string(row.status));
        if (row.cells.empty()) {
          std::snprintf(buf, sizeof buf, "%d,,,,%s,%.6e\n", row.group_size, status.c_str(), row.fit_residual);
          os << buf;
          continue;
        }
        for (const auto& c : row.cells) {
          std::snprintf(buf, sizeof buf, "%d,%d,%.12g,%d,%s,%.6e\n", row.group_size, c.tested, c.p0,
                        c.release ? 1 : 0, status.c_str(), row.fit_residual);
          os << buf;
        }
      }
      return kExitOk;
    }

    if (*min_cmd) {
      const auto preset = resolve_scenario(min_scenario, store_dir);
      const auto curve = resolve_curve(min_curve, preset.curve_id, store_dir);
      const auto prior = qrisk::fit_prior(
          {min_group_size, preset.targets.p_any_transmission, preset.targets.mean_given_transmission});
      const qrisk::DecisionPolicy policy{min_threshold.value_or(preset.threshold)};
      const auto n = qrisk::min_tests_for_release(prior, min_day, curve.curve, policy);
      if (min_json) {
        qrisk::Json out;
        out["min_tests"] = n ? qrisk::Json(*n) : qrisk::Json(nullptr);
        out["fraction_of_group"] = n ? qrisk::num(static_cast<double>(*n) / min_group_size) : qrisk::Json(nullptr);
        if (!n) out["reason"] = "not_achievable";
        std::cout << out.dump() << '\n';
      } else if (n) {
        std::printf("min_tests      %d (%.3f of group)\n", *n, static_cast<double>(*n) / min_group_size);
      } else {
        std::printf("min_tests      not achievable\n");
      }
      return n ? kExitOk : kExitModel;
    }

    if (*val_cmd) {
      const auto curve = resolve_curve(val_curve, std::string(qrisk::kDefaultCurveId), store_dir);
      const qrisk::TestSchedule schedule(val_group_size, parse_schedule(val_schedule));
      std::printf("%4s %16s %16s %12s %8s\n", "K", "analytic", "monte_carlo", "std_error", "z");
      int k_lo = val_k.value_or(0);
      int k_hi = val_k.value_or(val_group_size);
      int outside = 0;
      for (int k = k_lo; k <= k_hi; ++k) {
        const double analytic = qrisk::likelihood_all_negative_dp(schedule, k, curve.curve);
        const auto mc = qrisk::simulate_likelihood(schedule, k, curve.curve, replicates, seed + k);
        const double se = mc.standard_error > 0.0
                              ? mc.standard_error
                              : std::sqrt(analytic * (1.0 - analytic) / static_cast<double>(replicates));
        const double z = se > 0.0 ? (mc.estimate - analytic) / se : (mc.estimate == analytic ? 0.0 : INFINITY);
        if (std::abs(z) > 3.0) ++outside;
        std::printf("%4d %16.10f %16.10f %12.3e %8.3f\n", k, analytic, mc.estimate, mc.standard_error, z);
      }
      std::printf("%d of %d beyond 3 standard errors\n", outside, k_hi - k_lo + 1);
      return kExitOk;
    }
  } catch (const qrisk::FitFailed& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    print_fit(e.best());
    return kExitModel;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const qrisk::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const qrisk::Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", e.code().c_str(), e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
