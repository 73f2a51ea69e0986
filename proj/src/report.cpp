#include "membrane/report.hpp"

#include <charconv>
#include <cmath>

namespace membrane {

using nlohmann::json;

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

void Report::add_bound(const std::string& check, const std::string& case_name, double statistic, double tolerance,
                       json detail) {
  CheckResult r;
  r.check = check;
  r.case_name = case_name;
  r.statistic = statistic;
  r.tolerance = tolerance;
  r.pass = statistic <= tolerance;
  r.detail = std::move(detail);
  checks.push_back(std::move(r));
}

bool Report::pass() const {
  for (const CheckResult& c : checks)
    if (!c.pass) return false;
  return true;
}

json Report::to_json() const {
  json items = json::array();
  for (const CheckResult& c : checks) {
    json j{{"check", c.check},
           {"case", c.case_name},
           {"statistic", number_or_null(c.statistic)},
           {"tolerance", number_or_null(c.tolerance)},
           {"pass", c.pass}};
    if (!c.detail.empty()) j["detail"] = c.detail;
    items.push_back(std::move(j));
  }
  return json{{"schema_version", kReportSchemaVersion},
              {"command", command},
              {"suite", suite},
              {"case", case_name},
              {"pass", pass()},
              {"checks", std::move(items)}};
}

std::string Report::dump() const { return to_json().dump(2) + "\n"; }

std::string format_number(double v, int digits) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string shortest(buf, res.ptr);
  int significant = 0;
  bool leading = true;
  for (char c : shortest) {
    if (c == 'e' || c == 'E') break;
    if (c < '0' || c > '9') continue;
    if (leading && c == '0') continue;
    leading = false;
    ++significant;
  }
  if (significant <= digits) return shortest;
  res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, digits);
  return std::string(buf, res.ptr);
}

}  // namespace membrane
