#pragma once

#include <string>

#include "json.hpp"
#include "membrane/report.hpp"
#include "membrane/run_config.hpp"

namespace membrane {

// Throws InvalidInput naming every failed condition; the commands below call it first.
void require_valid(const RunConfig& c);
// suite: "semigroup", "conjugation", "generator" or "parametrix"; anything else throws InvalidInput.
Report run_check_suite(const RunConfig& c, const std::string& suite);
// Solver value against the particle simulation at every mc.x.
Report run_compare_mc(const RunConfig& c);
// Conditions I-V of the problem as a report.
Report run_validate(const RunConfig& c);
// CSV with header s,x,u,side, one row per (s, x).
std::string solve_csv(const RunConfig& c);
// Mesh, right-hand sides, tilde N, densities and series terms of the solve on [min s, t].
nlohmann::json kernel_dump_json(const RunConfig& c);

}  // namespace membrane
