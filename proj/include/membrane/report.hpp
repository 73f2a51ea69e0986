#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace membrane {

inline constexpr int kReportSchemaVersion = 1;

struct CheckResult {
  std::string check;
  std::string case_name;
  double statistic = 0.0;  // non-finite values serialize as null
  double tolerance = 0.0;
  bool pass = false;
  nlohmann::json detail = nlohmann::json::object();
};

struct Report {
  std::string command;
  std::string suite;
  std::string case_name;
  std::vector<CheckResult> checks;

  void add(CheckResult r) { checks.push_back(std::move(r)); }
  // statistic <= tolerance
  void add_bound(const std::string& check, const std::string& case_name, double statistic, double tolerance,
                 nlohmann::json detail = nlohmann::json::object());
  bool pass() const;
  nlohmann::json to_json() const;
  // Two-space indented JSON with a trailing newline.
  std::string dump() const;
};

// Shortest round-trip decimal form, cut to at most `digits` significant digits. Locale independent.
std::string format_number(double v, int digits);

}  // namespace membrane
