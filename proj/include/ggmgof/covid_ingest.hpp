#pragma once

// NYT state-level COVID-19 counts to a weekly panel with Census-region
// covariates.
//
// Daily new cases are differences of the cumulative series; a state-day with
// no record carries the previous cumulative count forward, and before a
// state's first record the first cumulative value is used, so no cases are
// attributed to unreported days. Negative differences (revisions) clamp to
// zero. Week w covers days 7w .. 7w+6 counted from January 1, giving 52
// complete weeks; December 31 is dropped.

#include <algorithm>
#include <chrono>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ggmgof/error.hpp"

namespace ggm {

enum class Region { NorthEast, MidWest, West, South };

inline const char* to_string(Region r) {
  switch (r) {
    case Region::NorthEast: return "NorthEast";
    case Region::MidWest: return "MidWest";
    case Region::West: return "West";
    case Region::South: return "South";
  }
  return "?";
}

inline Region parse_region(const std::string& s) {
  if (s == "NorthEast") return Region::NorthEast;
  if (s == "MidWest") return Region::MidWest;
  if (s == "West") return Region::West;
  if (s == "South") return Region::South;
  throw ConfigError("unknown region '" + s +
                    "' (expected NorthEast, MidWest, West or South)");
}

using RegionMap = std::map<std::string, Region>;

/// U.S. Census Bureau four-region assignment of the 50 states and DC.
inline const RegionMap& census_regions() {
  static const RegionMap table = [] {
    RegionMap m;
    for (const char* s : {"Connecticut", "Maine", "Massachusetts", "New Hampshire",
                          "New Jersey", "New York", "Pennsylvania", "Rhode Island",
                          "Vermont"})
      m[s] = Region::NorthEast;
    for (const char* s : {"Illinois", "Indiana", "Iowa", "Kansas", "Michigan",
                          "Minnesota", "Missouri", "Nebraska", "North Dakota", "Ohio",
                          "South Dakota", "Wisconsin"})
      m[s] = Region::MidWest;
    for (const char* s : {"Alaska", "Arizona", "California", "Colorado", "Hawaii",
                          "Idaho", "Montana", "Nevada", "New Mexico", "Oregon", "Utah",
                          "Washington", "Wyoming"})
      m[s] = Region::West;
    for (const char* s : {"Alabama", "Arkansas", "Delaware", "District of Columbia",
                          "Florida", "Georgia", "Kentucky", "Louisiana", "Maryland",
                          "Mississippi", "North Carolina", "Oklahoma", "South Carolina",
                          "Tennessee", "Texas", "Virginia", "West Virginia"})
      m[s] = Region::South;
    return m;
  }();
  return table;
}

inline RegionMap parse_region_map(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("region mapping must be a JSON object");
  RegionMap m;
  for (const auto& [state, region] : j.items()) {
    if (!region.is_string())
      throw ConfigError("region of '" + state + "' must be a string");
    m[state] = parse_region(region.get<std::string>());
  }
  return m;
}

inline nlohmann::json region_map_to_json(const RegionMap& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [state, region] : m) j[state] = to_string(region);
  return j;
}

using Day = std::chrono::sys_days;

inline Day parse_date(const std::string& s) {
  int y = 0;
  unsigned mo = 0, d = 0;
  char dash1 = 0, dash2 = 0;
  std::istringstream is(s);
  if (!(is >> y >> dash1 >> mo >> dash2 >> d) || dash1 != '-' || dash2 != '-' ||
      is.peek() != std::char_traits<char>::eof())
    throw InvalidArgument("bad date '" + s + "'");
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo},
                                        std::chrono::day{d}};
  if (!ymd.ok()) throw InvalidArgument("bad date '" + s + "'");
  return Day{ymd};
}

inline std::string format_date(Day day) {
  const std::chrono::year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

struct DailyCount {
  Day date;
  double cumulative = 0.0;
};

struct NytRecords {
  /// Date-sorted cumulative counts per retained state.
  std::map<std::string, std::vector<DailyCount>> by_state;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(field);
  return out;
}

}  // namespace detail

/// Parses the us-states.csv schema (date,state,fips,cases,deaths). States not
/// in `known` are skipped with one warning each.
inline NytRecords load_nyt_csv(std::istream& in,
                               const RegionMap& known = census_regions()) {
  NytRecords out;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) return out;
  ++lineno;
  const auto header = detail::split_csv_line(line);
  const std::vector<std::string> expected{"date", "state", "fips", "cases", "deaths"};
  if (header.size() < 4 ||
      !std::equal(expected.begin(), expected.begin() + 4, header.begin()))
    throw ParseError("expected header date,state,fips,cases,deaths", lineno);

  std::set<std::string> skipped;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() < 4) throw ParseError("expected at least 4 fields", lineno);
    Day date;
    double cases = 0.0;
    try {
      date = parse_date(f[0]);
      std::size_t used = 0;
      cases = std::stod(f[3], &used);
      if (used != f[3].size() || !(cases >= 0.0)) throw InvalidArgument("cases");
    } catch (const std::exception&) {
      throw ParseError("malformed row '" + line + "'", lineno);
    }
    const std::string& state = f[1];
    if (!known.count(state)) {
      if (skipped.insert(state).second)
        out.warnings.push_back("skipping unknown state '" + state + "'");
      continue;
    }
    out.by_state[state].push_back(DailyCount{date, cases});
  }
  for (auto& [state, series] : out.by_state) {
    std::stable_sort(series.begin(), series.end(),
                     [](const DailyCount& a, const DailyCount& b) { return a.date < b.date; });
    // Repeated dates keep the last row.
    std::vector<DailyCount> dedup;
    for (const auto& r : series) {
      if (!dedup.empty() && dedup.back().date == r.date)
        dedup.back() = r;
      else
        dedup.push_back(r);
    }
    series = std::move(dedup);
  }
  return out;
}

inline constexpr int kWeeks = 52;

struct WeeklyPanel {
  std::vector<std::string> states;
  std::vector<std::string> weeks;  // first day of each window
  Eigen::MatrixXd values;          // states x weeks, thousands of cases
  std::vector<Region> regions;
};

/// Daily new cases for the `days` days starting at `start`.
inline std::vector<double> daily_new_cases(const std::vector<DailyCount>& series,
                                           Day start, int days) {
  std::vector<double> out(static_cast<std::size_t>(days), 0.0);
  if (series.empty()) return out;
  std::size_t next = 0;
  double cum = series.front().cumulative;
  // Baseline: last cumulative before `start`.
  while (next < series.size() && series[next].date < start) cum = series[next++].cumulative;
  for (int d = 0; d < days; ++d) {
    const Day today = start + std::chrono::days{d};
    double today_cum = cum;
    while (next < series.size() && series[next].date <= today)
      today_cum = series[next++].cumulative;
    out[static_cast<std::size_t>(d)] = std::max(0.0, today_cum - cum);
    cum = today_cum;
  }
  return out;
}

inline WeeklyPanel weekly_aggregate(const NytRecords& records, int year = 2021,
                                    const RegionMap& regions = census_regions()) {
  WeeklyPanel panel;
  const Day start = Day{std::chrono::year{year} / std::chrono::January / 1};
  for (int w = 0; w < kWeeks; ++w)
    panel.weeks.push_back(format_date(start + std::chrono::days{7 * w}));
  panel.values.resize(static_cast<Eigen::Index>(records.by_state.size()), kWeeks);
  Eigen::Index row = 0;
  for (const auto& [state, series] : records.by_state) {
    const auto daily = daily_new_cases(series, start, 7 * kWeeks);
    for (int w = 0; w < kWeeks; ++w) {
      double sum = 0.0;
      for (int d = 0; d < 7; ++d) sum += daily[static_cast<std::size_t>(7 * w + d)];
      panel.values(row, w) = sum / 1000.0;
    }
    panel.states.push_back(state);
    const auto it = regions.find(state);
    if (it == regions.end()) throw ConfigError("state '" + state + "' has no region");
    panel.regions.push_back(it->second);
    ++row;
  }
  return panel;
}

/// Columns: NorthEast, MidWest, West indicators; South is the baseline.
inline Eigen::MatrixXd region_dummies(const WeeklyPanel& panel,
                                      const RegionMap& mapping = census_regions()) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(panel.states.size()), 3);
  for (std::size_t i = 0; i < panel.states.size(); ++i) {
    const auto it = mapping.find(panel.states[i]);
    if (it == mapping.end())
      throw ConfigError("state '" + panel.states[i] + "' is not in the region mapping");
    const auto r = static_cast<Eigen::Index>(i);
    switch (it->second) {
      case Region::NorthEast: x(r, 0) = 1.0; break;
      case Region::MidWest: x(r, 1) = 1.0; break;
      case Region::West: x(r, 2) = 1.0; break;
      case Region::South: break;
    }
  }
  return x;
}

}  // namespace ggm
