#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "membrane/boundary_system.hpp"
#include "membrane/mc_oracle.hpp"
#include "membrane/problem.hpp"

namespace membrane {

inline constexpr int kConfigSchemaVersion = 1;

struct SolveSpec {
  std::vector<double> s{0.0};
  double t = 1.0;
  std::vector<double> x;  // empty: the audit grid
};

struct CheckSpec {
  double s = 0.0;
  double tau = 0.5;
  double t = 1.0;
  std::vector<double> dts{0.04, 0.02, 0.01};
  double f_center = 0.0;  // bump test function of the generator checks
  double f_radius = 1.5;
  std::vector<double> domain_x{-0.5, 0.5};
  std::vector<double> domain_dts{0.004, 0.002, 0.001};
  double ck_tolerance = 5e-3;
};

struct McSpec {
  double s = 0.0;
  double t = 1.0;
  std::vector<double> x{0.0};
  SimConfig sim;
  double k_sigma = 3.0;
};

struct RunConfig {
  std::string name;
  Problem problem;
  InitialFunction phi = InitialFunction::constant_one();
  SolveSpec solve;
  CheckSpec check;
  McSpec mc;
  SolverSettings solver;
  int precision = 12;
};

// Unknown keys and bad values throw Error(InvalidInput) naming the dotted key path.
// "problem" is either an inline problem object or a path relative to base_dir.
RunConfig run_config_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
RunConfig run_config_from_text(const std::string& text, const std::string& base_dir = ".");
// Throws Error(Io) when the file cannot be read.
RunConfig load_run_config(const std::string& path);

}  // namespace membrane
