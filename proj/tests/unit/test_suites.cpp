#include <gtest/gtest.h>

#include <sstream>

#include "membrane/error.hpp"
#include "membrane/suites.hpp"

using namespace membrane;

namespace {

RunConfig config(const std::string& name) { return load_run_config(std::string(MEMBRANE_CONFIG_DIR) + "/" + name); }

void expect_pass(const Report& r) { EXPECT_TRUE(r.pass()) << r.dump(); }

const CheckResult* find(const Report& r, const std::string& check) {
  for (const CheckResult& c : r.checks)
    if (c.check == check) return &c;
  return nullptr;
}

}  // namespace

TEST(RunConfig, LoadsShippedConfigs) {
  for (const char* name : {"heat_symmetric.json", "skew.json", "skew_moving_membrane.json", "atoms_both_sides.json",
                           "single_atom.json", "variable_diffusion.json", "conservation_moving.json"})
    EXPECT_NO_THROW(config(name)) << name;
}

TEST(RunConfig, UnknownKeyNamesThePath) {
  try {
    run_config_from_text(R"({"problem": {"horizon": 1, "left": {"drift": 0, "diffusion": 1, "difusion": 2},
      "right": {"drift": 0, "diffusion": 1}, "membrane": 0, "wentzell": {"q1": 1, "q2": 1}}})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidInput);
    EXPECT_NE(std::string(e.what()).find("problem.left.difusion"), std::string::npos) << e.what();
  }
}

TEST(RunConfig, MalformedJson) {
  try {
    run_config_from_text("{\"problem\": ");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidInput);
  }
}

TEST(RunConfig, MissingFileIsIoError) {
  try {
    load_run_config("/nonexistent/config.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
}

TEST(RunConfig, TimesMustStayInHorizon) {
  const std::string base = R"({"problem": {"horizon": 1, "left": {"drift": 0, "diffusion": 1},
      "right": {"drift": 0, "diffusion": 1}, "membrane": 0, "wentzell": {"q1": 1, "q2": 1}}, )";
  EXPECT_THROW(run_config_from_text(base + R"("solve": {"s": [0.5], "t": 2.0}})"), Error);
  EXPECT_THROW(run_config_from_text(base + R"("check": {"s": 0.5, "tau": 0.2, "t": 1.0}})"), Error);
  EXPECT_THROW(run_config_from_text(base + R"("mc": {"scheme": "milstein"}})"), Error);
}

TEST(Report, FormatNumber) {
  EXPECT_EQ(format_number(0.1, 12), "0.1");
  EXPECT_EQ(format_number(1.0 / 3.0, 12), "0.333333333333");
  EXPECT_EQ(format_number(-2.5e-7, 12), "-2.5e-07");
  EXPECT_EQ(format_number(1.0, 3), "1");
  EXPECT_EQ(format_number(123456.0, 3), "1.23e+05");
}

TEST(Report, NonFiniteStatisticIsNull) {
  Report r;
  r.add_bound("x", "c", std::numeric_limits<double>::infinity(), 3.0);
  const auto j = r.to_json();
  EXPECT_TRUE(j["checks"][0]["statistic"].is_null());
  EXPECT_FALSE(j["pass"].get<bool>());
}

TEST(Suites, UnknownSuite) { EXPECT_THROW(run_check_suite(config("heat_symmetric.json"), "nope"), Error); }

TEST(Suites, SemigroupOnHeatCase) {
  const Report r = run_check_suite(config("heat_symmetric.json"), "semigroup");
  expect_pass(r);
  EXPECT_NE(find(r, "heat-oracle"), nullptr);
  EXPECT_NE(find(r, "chapman-kolmogorov"), nullptr);
}

TEST(Suites, SemigroupOnSkewCase) {
  const Report r = run_check_suite(config("skew.json"), "semigroup");
  expect_pass(r);
  EXPECT_NE(find(r, "skew-oracle"), nullptr);
}

TEST(Suites, SemigroupOnMovingMembrane) { expect_pass(run_check_suite(config("skew_moving_membrane.json"), "semigroup")); }

TEST(Suites, ConjugationOnSkewCase) { expect_pass(run_check_suite(config("skew.json"), "conjugation")); }

TEST(Suites, ConjugationWithAtomsOnBothSides) { expect_pass(run_check_suite(config("atoms_both_sides.json"), "conjugation")); }

TEST(Suites, GeneratorOnSkewCase) {
  const Report r = run_check_suite(config("skew.json"), "generator");
  expect_pass(r);
  EXPECT_NE(find(r, "drift-limit"), nullptr);
}

TEST(Suites, GeneratorOnSingleAtom) {
  const Report r = run_check_suite(config("single_atom.json"), "generator");
  expect_pass(r);
  EXPECT_EQ(find(r, "drift-limit"), nullptr);
}

TEST(Suites, ParametrixOnConstantCase) {
  const Report r = run_check_suite(config("heat_symmetric.json"), "parametrix");
  expect_pass(r);
  for (const CheckResult& c : r.checks) EXPECT_LE(c.statistic, 1e-9) << c.check;
}

TEST(Suites, ValidateReportsConditions) {
  const Report r = run_validate(config("skew.json"));
  expect_pass(r);
  EXPECT_EQ(r.checks.size(), 5u);
}

TEST(Suites, SolveCsvConservesConstants) {
  const RunConfig c = config("conservation_moving.json");
  std::istringstream in(solve_csv(c));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "s,x,u,side");
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string s, x, u, side;
    std::getline(ss, s, ',');
    std::getline(ss, x, ',');
    std::getline(ss, u, ',');
    std::getline(ss, side, ',');
    EXPECT_NEAR(std::stod(u), 1.0, 1e-3) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 18);
}

TEST(Suites, KernelDumpShapes) {
  const auto j = kernel_dump_json(config("skew.json"));
  const std::size_t n = j["mesh"]["s"].size();
  EXPECT_EQ(j["w1"].size(), n);
  EXPECT_EQ(j["rhs"]["phi"].size(), n);
  EXPECT_EQ(j["tilde_n"].size(), 2u);
  EXPECT_FALSE(j["term_sup"].empty());
}
