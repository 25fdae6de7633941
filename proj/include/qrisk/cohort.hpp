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
#include <array>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "qrisk/errors.hpp"
#include "qrisk/likelihood.hpp"
#include "qrisk/sensitivity.hpp"

/**
 * @file cohort.hpp
 *
 * @brief Health-department line lists: one row per contact with the date of
 * last contact and an optional PCR test date and result.
 *
 * CSV columns are `case_id,last_contact,test_date,test_result`. Dates are
 * ISO-8601 (`2020-08-10`); the long form `August 10, 2020` is accepted as
 * well (quote the field). An empty test date/result, or `---`, means the
 * contact was not tested.
 */

namespace qrisk {

using Date = std::chrono::year_month_day;

enum class TestResult { Negative, Positive };

inline std::string_view to_string(TestResult r) {
  return r == TestResult::Negative ? "negative" : "positive";
}

struct CohortRecord {
  std::string case_id;
  Date last_contact;
  std::optional<Date> test_date;
  std::optional<TestResult> result;

  friend bool operator==(const CohortRecord&, const CohortRecord&) = default;
};

struct Exclusion {
  std::string case_id;
  std::string reason;
};

struct CohortReport {
  TestSchedule schedule;
  Date event_date;
  std::vector<Exclusion> excluded;
  std::vector<CohortRecord> included;
  int untested_count = 0;
  int positive_count = 0;
  bool any_positive = false;
  std::vector<std::string> warnings;
};

inline constexpr std::string_view kHeterogeneousContactReason =
    "heterogeneous last contact \xE2\x80\x94 assess individually";

inline std::string to_iso(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

inline int days_between(Date from, Date to) {
  return static_cast<int>((std::chrono::sys_days{to} - std::chrono::sys_days{from}).count());
}

/// Parses `YYYY-MM-DD` or `Month D, YYYY` (full or three-letter month name).
inline std::optional<Date> parse_date(std::string_view text) {
  using namespace std::chrono;
  const auto s = detail::trim(text);
  auto valid = [](int y, unsigned m, unsigned d) -> std::optional<Date> {
    Date date{year{y}, month{m}, day{d}};
    if (!date.ok()) return std::nullopt;
    return date;
  };
  if (s.size() == 10 && s[4] == '-' && s[7] == '-') {
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    if (!detail::parse_number(s.substr(0, 4), y) || !detail::parse_number(s.substr(5, 2), m) ||
        !detail::parse_number(s.substr(8, 2), d)) {
      return std::nullopt;
    }
    return valid(y, m, d);
  }
  static constexpr std::array<std::string_view, 12> kMonths = {
      "january", "february", "march",     "april",   "may",      "june",
      "july",    "august",   "september", "october", "november", "december"};
  const auto sp = s.find(' ');
  const auto comma = s.find(',');
  if (sp == std::string_view::npos || comma == std::string_view::npos || comma < sp) {
    return std::nullopt;
  }
  std::string name(s.substr(0, sp));
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  unsigned m = 0;
  for (unsigned i = 0; i < 12; ++i) {
    if (name == kMonths[i] || (name.size() == 3 && kMonths[i].substr(0, 3) == name)) m = i + 1;
  }
  unsigned d = 0;
  int y = 0;
  if (m == 0 || !detail::parse_number(s.substr(sp + 1, comma - sp - 1), d) ||
      !detail::parse_number(s.substr(comma + 1), y)) {
    return std::nullopt;
  }
  return valid(y, m, d);
}

namespace detail {

// One RFC 4180 record per line (no embedded newlines).
inline std::vector<std::string> split_csv_fields(std::string_view line, int line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      if (!trim(cur).empty()) throw ParseError("stray quote", line_no);
      cur.clear();
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(was_quoted ? cur : std::string(trim(cur)));
      cur.clear();
      was_quoted = false;
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError("unterminated quote", line_no);
  fields.push_back(was_quoted ? cur : std::string(trim(cur)));
  return fields;
}

inline bool is_blank_field(std::string_view f) {
  f = trim(f);
  return f.empty() || f == "---" || f == "-";
}

}  // namespace detail

/// Parses a cohort CSV into records. Per-row structural problems raise
/// ParseError with the line number; semantic checks happen in `ingest`.
inline std::vector<CohortRecord> parse_cohort_csv(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<CohortRecord> records;
  bool seen_header = false;
  int line_no = 0;
  for (auto raw : detail::split_lines(text)) {
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = detail::split_csv_fields(line, line_no);
    if (!seen_header) {
      if (fields != std::vector<std::string>{"case_id", "last_contact", "test_date", "test_result"}) {
        throw ParseError("expected header 'case_id,last_contact,test_date,test_result'", line_no);
      }
      seen_header = true;
      continue;
    }
    if (fields.size() != 4) throw ParseError("expected 4 fields", line_no);
    CohortRecord rec;
    rec.case_id = fields[0];
    if (rec.case_id.empty()) throw ParseError("empty case_id", line_no);
    const auto contact = parse_date(fields[1]);
    if (!contact) throw ParseError("unparseable last_contact '" + fields[1] + "'", line_no);
    rec.last_contact = *contact;
    if (!detail::is_blank_field(fields[2])) {
      const auto tested = parse_date(fields[2]);
      if (!tested) throw ParseError("unparseable test_date '" + fields[2] + "'", line_no);
      rec.test_date = *tested;
    }
    if (!detail::is_blank_field(fields[3])) {
      std::string r = fields[3];
      std::transform(r.begin(), r.end(), r.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      if (r == "negative") {
        rec.result = TestResult::Negative;
      } else if (r == "positive") {
        rec.result = TestResult::Positive;
      } else {
        throw ParseError("test_result must be 'negative' or 'positive'", line_no);
      }
    }
    records.push_back(std::move(rec));
  }
  if (!seen_header) throw ParseError("missing cohort header", 0);
  return records;
}

/// Writes records in the machine format (ISO dates, empty untested fields).
inline std::string serialize_cohort_csv(const std::vector<CohortRecord>& records) {
  std::string out = "case_id,last_contact,test_date,test_result\n";
  for (const auto& r : records) {
    const bool needs_quotes = r.case_id.find_first_of(",\"") != std::string::npos;
    if (needs_quotes) {
      out += '"';
      for (char c : r.case_id) out += c == '"' ? std::string("\"\"") : std::string(1, c);
      out += '"';
    } else {
      out += r.case_id;
    }
    out += ',' + to_iso(r.last_contact) + ',';
    if (r.test_date) out += to_iso(*r.test_date);
    out += ',';
    if (r.result) out += to_string(*r.result);
    out += '\n';
  }
  return out;
}

/**
 * Builds the day-stratified schedule for the cohort that shares the event
 * date. The event date defaults to the most common last-contact date (ties go
 * to the earliest, with a warning). Contacts with a different last-contact
 * date are excluded and listed with a reason. Positive contacts count towards
 * the group size but are not part of the negative-test schedule.
 */
inline CohortReport ingest(const std::vector<CohortRecord>& records,
                           std::optional<Date> event_date = std::nullopt) {
  if (records.empty()) throw ValidationError("empty_cohort", "cohort has no records");

  std::set<std::string> seen;
  for (const auto& r : records) {
    if (!seen.insert(r.case_id).second) {
      throw ValidationError("duplicate_case",
                            "case '" + r.case_id + "' appears more than once (one test per person)",
                            r.case_id);
    }
    if (r.test_date.has_value() != r.result.has_value()) {
      throw ValidationError("incomplete_test_record",
                            "case '" + r.case_id + "' must have both a test date and a result, or neither",
                            r.case_id);
    }
    if (r.test_date && days_between(r.last_contact, *r.test_date) < 0) {
      throw ValidationError("test_before_contact",
                            "case '" + r.case_id + "' was tested before the last contact", r.case_id);
    }
  }

  CohortReport report;
  if (event_date) {
    report.event_date = *event_date;
  } else {
    std::map<std::chrono::sys_days, int> counts;
    for (const auto& r : records) ++counts[std::chrono::sys_days{r.last_contact}];
    int best = 0;
    int modal_dates = 0;
    for (const auto& [d, n] : counts) {
      if (n > best) {
        best = n;
        report.event_date = Date{d};
        modal_dates = 1;
      } else if (n == best) {
        ++modal_dates;
      }
    }
    if (modal_dates > 1) {
      report.warnings.push_back("several last-contact dates are equally common; using the earliest, " +
                                to_iso(report.event_date));
    }
  }

  std::map<int, int> per_day;
  for (const auto& r : records) {
    if (r.last_contact != report.event_date) {
      report.excluded.push_back({r.case_id, std::string(kHeterogeneousContactReason)});
      continue;
    }
    report.included.push_back(r);
    if (!r.test_date) {
      ++report.untested_count;
      continue;
    }
    const int offset = days_between(report.event_date, *r.test_date);
    if (offset < 0) {
      throw ValidationError("test_before_event",
                            "case '" + r.case_id + "' was tested before the event date", r.case_id);
    }
    if (offset == 0) {
      throw ValidationError("test_on_event_day",
                            "case '" + r.case_id + "' was tested on the event day itself; "
                            "test days are counted from day 1", r.case_id);
    }
    if (*r.result == TestResult::Positive) {
      ++report.positive_count;
      report.any_positive = true;
      continue;
    }
    ++per_day[offset];
  }
  if (report.included.empty()) {
    throw ValidationError("empty_cohort", "every record was excluded");
  }

  std::vector<DayGroup> groups;
  for (const auto& [day, count] : per_day) groups.push_back({day, count});
  report.schedule = TestSchedule(static_cast<int>(report.included.size()), std::move(groups));
  return report;
}

}  // namespace qrisk
