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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "qrisk/errors.hpp"
#include "qrisk/evaluate.hpp"
#include "qrisk/json_io.hpp"
#include "qrisk/sensitivity.hpp"

/**
 * @file store.hpp
 *
 * @brief File-backed scenario presets and read-only sensitivity curves.
 *
 * Layout under the store directory:
 *
 *     scenarios/<id>.json   {"name", "p_any_transmission", "mean_given_transmission",
 *                            "curve_id", "threshold", "version"}
 *     curves/<id>.csv       day,sensitivity
 *
 * The school-class preset and the default PCR curve are built in and used
 * whenever no file of the same id exists.
 */

namespace qrisk {

struct ScenarioPreset {
  std::string id;
  std::string name;
  ScenarioTargets targets;
  std::string curve_id = std::string(kDefaultCurveId);
  double threshold = 0.9;
  long version = 1;
};

inline constexpr std::string_view kSchoolClassId = "school_class";

inline ScenarioPreset school_class_preset() {
  ScenarioPreset p;
  p.id = std::string(kSchoolClassId);
  p.name = "School class";
  p.targets = {3.0 / 21.0, 4.8};
  return p;
}

inline bool valid_store_id(std::string_view id) {
  if (id.empty() || id.size() > 128) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-';
  });
}

/// Checks a preset's own fields; `field_path` names the offending field.
struct PresetProblem {
  std::string code;
  std::string message;
  std::string field_path;
};

inline std::optional<PresetProblem> check_preset(const ScenarioPreset& p) {
  if (!(p.targets.p_any_transmission > 0.0 && p.targets.p_any_transmission < 1.0)) {
    return PresetProblem{"invalid_p_any_transmission", "p_any_transmission must lie in (0, 1)",
                         "/p_any_transmission"};
  }
  if (!(p.targets.mean_given_transmission > 1.0) ||
      !std::isfinite(p.targets.mean_given_transmission)) {
    return PresetProblem{"invalid_mean_given_transmission",
                         "mean_given_transmission must be greater than 1", "/mean_given_transmission"};
  }
  if (!(p.threshold > 0.0 && p.threshold < 1.0)) {
    return PresetProblem{"invalid_threshold", "threshold must lie in (0, 1)", "/threshold"};
  }
  if (!valid_store_id(p.curve_id)) {
    return PresetProblem{"invalid_id", "curve_id has invalid characters", "/curve_id"};
  }
  return std::nullopt;
}

inline Json to_json(const ScenarioPreset& p) {
  return Json{{"id", p.id},
              {"name", p.name},
              {"p_any_transmission", num(p.targets.p_any_transmission)},
              {"mean_given_transmission", num(p.targets.mean_given_transmission)},
              {"curve_id", p.curve_id},
              {"threshold", num(p.threshold)},
              {"version", p.version}};
}

/// On-disk form; unlike to_json, numbers keep full precision.
inline Json stored_document(const ScenarioPreset& p) {
  return Json{{"id", p.id},
              {"name", p.name},
              {"p_any_transmission", p.targets.p_any_transmission},
              {"mean_given_transmission", p.targets.mean_given_transmission},
              {"curve_id", p.curve_id},
              {"threshold", p.threshold},
              {"version", p.version}};
}

/// Reads a preset document. Only name and the two targets are required.
inline ScenarioPreset preset_from_json(const nlohmann::json& j, std::string fallback_id) {
  ScenarioPreset p;
  p.id = j.value("id", fallback_id);
  p.name = j.at("name").get<std::string>();
  p.targets.p_any_transmission = j.at("p_any_transmission").get<double>();
  p.targets.mean_given_transmission = j.at("mean_given_transmission").get<double>();
  p.curve_id = j.value("curve_id", std::string(kDefaultCurveId));
  p.threshold = j.value("threshold", 0.9);
  p.version = j.value("version", 1L);
  return p;
}

inline std::optional<std::string> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class VersionConflict : public Error {
 public:
  VersionConflict(long expected, long actual)
      : Error("version_conflict", "expected version " + std::to_string(expected) +
                                      " but the stored version is " + std::to_string(actual)) {}
};

class ScenarioStore {
 public:
  /// An empty directory path gives a store with only the built-in presets
  /// that rejects writes.
  explicit ScenarioStore(std::filesystem::path dir = {}) : dir_(std::move(dir)) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_ / "scenarios");
  }

  std::optional<ScenarioPreset> get(const std::string& id) const {
    if (!valid_store_id(id)) return std::nullopt;
    if (!dir_.empty()) {
      if (auto text = read_file(path_for(id))) {
        return preset_from_json(nlohmann::json::parse(*text), id);
      }
    }
    if (id == kSchoolClassId) return school_class_preset();
    return std::nullopt;
  }

  /// All presets sorted by id.
  std::vector<ScenarioPreset> list() const {
    std::map<std::string, ScenarioPreset> all;
    all.emplace(std::string(kSchoolClassId), school_class_preset());
    if (!dir_.empty()) {
      for (const auto& entry : std::filesystem::directory_iterator(dir_ / "scenarios")) {
        if (entry.path().extension() != ".json") continue;
        const auto id = entry.path().stem().string();
        if (!valid_store_id(id)) continue;
        if (auto p = get(id)) all.insert_or_assign(id, *p);
      }
    }
    std::vector<ScenarioPreset> out;
    for (auto& [id, p] : all) out.push_back(std::move(p));
    return out;
  }

  /**
   * Compare-and-set write. `expected_version` must equal the stored version
   * (0 when the preset does not exist yet). Returns the stored preset with
   * its new version. The document is written to a temporary file and renamed
   * into place, so readers only ever see complete documents.
   */
  ScenarioPreset put(ScenarioPreset preset, long expected_version) {
    if (dir_.empty()) throw Error("store_read_only", "scenario store has no directory");
    const auto lock = lock_for(preset.id);
    const auto current = get(preset.id);
    const long actual = current ? current->version : 0;
    if (expected_version != actual) throw VersionConflict(expected_version, actual);
    preset.version = actual + 1;
    const auto target = path_for(preset.id);
    auto tmp = target;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << stored_document(preset).dump(2) << '\n';
      if (!out) throw Error("store_io", "could not write " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
    return preset;
  }

 private:
  std::filesystem::path path_for(const std::string& id) const {
    return dir_ / "scenarios" / (id + ".json");
  }

  std::unique_lock<std::mutex> lock_for(const std::string& id) {
    std::lock_guard<std::mutex> guard(locks_mutex_);
    auto& m = locks_[id];
    if (!m) m = std::make_unique<std::mutex>();
    return std::unique_lock<std::mutex>(*m);
  }

  std::filesystem::path dir_;
  std::mutex locks_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

class CurveStore {
 public:
  /// `default_curve_path`, when given, replaces the built-in default curve.
  explicit CurveStore(std::filesystem::path dir = {},
                      std::optional<std::filesystem::path> default_curve_path = std::nullopt)
      : dir_(std::move(dir)), default_curve_(default_pcr_curve()) {
    if (default_curve_path) {
      const auto text = read_file(*default_curve_path);
      if (!text) throw Error("io_error", "cannot read curve " + default_curve_path->string());
      default_curve_ = load_curve(*text, std::string(kDefaultCurveId));
    }
  }

  std::optional<SensitivityCurve> get(const std::string& id) const {
    if (!valid_store_id(id)) return std::nullopt;
    if (!dir_.empty()) {
      if (auto text = read_file(dir_ / "curves" / (id + ".csv"))) return load_curve(*text, id);
    }
    if (id == kDefaultCurveId) return default_curve_;
    return std::nullopt;
  }

  std::vector<std::string> ids() const {
    std::vector<std::string> out{std::string(kDefaultCurveId)};
    if (!dir_.empty() && std::filesystem::is_directory(dir_ / "curves")) {
      for (const auto& entry : std::filesystem::directory_iterator(dir_ / "curves")) {
        if (entry.path().extension() != ".csv") continue;
        const auto id = entry.path().stem().string();
        if (valid_store_id(id)) out.push_back(id);
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  std::filesystem::path dir_;
  SensitivityCurve default_curve_;
};

}  // namespace qrisk
