#include "membrane/membrane.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <string>

#include "membrane/error.hpp"
#include "membrane/mc_oracle.hpp"
#include "membrane/parallel.hpp"
#include "membrane/problem_json.hpp"
#include "membrane/run_config.hpp"
#include "membrane/semigroup.hpp"
#include "membrane/suites.hpp"

struct mbr_config {
  membrane::RunConfig c;
};
struct mbr_problem {
  membrane::Problem p;
};
struct mbr_function {
  membrane::InitialFunction f;
};
struct mbr_semigroup {
  std::unique_ptr<membrane::SemigroupOperator> op;
};

namespace {

thread_local std::string t_last_error;

template <class F>
mbr_status guarded(F&& f) {
  try {
    f();
    t_last_error.clear();
    return MBR_OK;
  } catch (const membrane::Error& e) {
    t_last_error = e.message();
    return static_cast<mbr_status>(static_cast<int>(e.code()));
  } catch (const nlohmann::json::exception& e) {
    t_last_error = std::string("malformed JSON: ") + e.what();
    return MBR_INVALID_INPUT;
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return MBR_INTERNAL;
  } catch (...) {
    t_last_error = "unknown failure";
    return MBR_INTERNAL;
  }
}

mbr_status null_argument(const char* what) {
  t_last_error = std::string("null argument: ") + what;
  return MBR_NULL_ARGUMENT;
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

nlohmann::json parse(const char* text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw membrane::Error(membrane::ErrorCode::InvalidInput, std::string("malformed JSON: ") + e.what());
  }
}

mbr_status report_out(const mbr_config* config, char** report, int* pass,
                      membrane::Report (*run)(const membrane::RunConfig&)) {
  if (!config) return null_argument("config");
  if (!report || !pass) return null_argument("output");
  return guarded([&] {
    const membrane::Report r = run(config->c);
    *report = copy_string(r.dump());
    *pass = r.pass() ? 1 : 0;
  });
}

}  // namespace

extern "C" {

const char* mbr_version(void) { return "1.0.0"; }

const char* mbr_status_name(mbr_status status) {
  switch (status) {
    case MBR_OK:
      return "Ok";
    case MBR_NULL_ARGUMENT:
      return "NullArgument";
    case MBR_INTERNAL:
      return "Internal";
    default:
      if (status >= MBR_INVALID_INPUT && status <= MBR_IO)
        return membrane::to_string(static_cast<membrane::ErrorCode>(static_cast<int>(status)));
      return "Unknown";
  }
}

const char* mbr_last_error(void) { return t_last_error.c_str(); }

void mbr_string_free(char* s) { std::free(s); }

void mbr_set_threads(int n) { membrane::set_max_threads(n); }

mbr_status mbr_config_load(const char* path, mbr_config** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  return guarded([&] { *out = new mbr_config{membrane::load_run_config(path)}; });
}

mbr_status mbr_config_parse(const char* json, const char* base_dir, mbr_config** out) {
  if (!json) return null_argument("json");
  if (!out) return null_argument("out");
  return guarded([&] { *out = new mbr_config{membrane::run_config_from_text(json, base_dir ? base_dir : ".")}; });
}

void mbr_config_free(mbr_config* config) { delete config; }

mbr_status mbr_config_set_seed(mbr_config* config, uint64_t seed) {
  if (!config) return null_argument("config");
  config->c.mc.sim.seed = seed;
  return MBR_OK;
}

mbr_status mbr_config_set_paths(mbr_config* config, size_t paths) {
  if (!config) return null_argument("config");
  if (paths < 1) {
    t_last_error = "paths must be >= 1";
    return MBR_INVALID_INPUT;
  }
  config->c.mc.sim.paths = paths;
  return MBR_OK;
}

mbr_status mbr_solve_csv(const mbr_config* config, char** csv) {
  if (!config) return null_argument("config");
  if (!csv) return null_argument("csv");
  return guarded([&] { *csv = copy_string(membrane::solve_csv(config->c)); });
}

mbr_status mbr_check(const mbr_config* config, const char* suite, char** report, int* pass) {
  if (!config) return null_argument("config");
  if (!suite) return null_argument("suite");
  if (!report || !pass) return null_argument("output");
  return guarded([&] {
    const membrane::Report r = membrane::run_check_suite(config->c, suite);
    *report = copy_string(r.dump());
    *pass = r.pass() ? 1 : 0;
  });
}

mbr_status mbr_compare_mc(const mbr_config* config, char** report, int* pass) {
  return report_out(config, report, pass, &membrane::run_compare_mc);
}

mbr_status mbr_validate(const mbr_config* config, char** report, int* pass) {
  return report_out(config, report, pass, &membrane::run_validate);
}

mbr_status mbr_dump_kernels(const mbr_config* config, char** json) {
  if (!config) return null_argument("config");
  if (!json) return null_argument("json");
  return guarded([&] { *json = copy_string(membrane::kernel_dump_json(config->c).dump() + "\n"); });
}

mbr_status mbr_problem_parse(const char* json, mbr_problem** out) {
  if (!json) return null_argument("json");
  if (!out) return null_argument("out");
  return guarded([&] { *out = new mbr_problem{membrane::problem_from_json(parse(json))}; });
}

void mbr_problem_free(mbr_problem* problem) { delete problem; }

mbr_status mbr_function_parse(const char* json, mbr_function** out) {
  if (!json) return null_argument("json");
  if (!out) return null_argument("out");
  return guarded([&] { *out = new mbr_function{membrane::initial_function_from_json(parse(json))}; });
}

void mbr_function_free(mbr_function* f) { delete f; }

mbr_status mbr_function_eval(const mbr_function* f, double x, double* out) {
  if (!f) return null_argument("function");
  if (!out) return null_argument("out");
  return guarded([&] { *out = f->f(x); });
}

mbr_status mbr_semigroup_create(const mbr_problem* problem, mbr_semigroup** out) {
  if (!problem) return null_argument("problem");
  if (!out) return null_argument("out");
  return guarded([&] { *out = new mbr_semigroup{std::make_unique<membrane::SemigroupOperator>(problem->p)}; });
}

void mbr_semigroup_free(mbr_semigroup* op) { delete op; }

mbr_status mbr_semigroup_value(const mbr_semigroup* op, double s, double x, double t, const mbr_function* phi,
                               double* out) {
  if (!op) return null_argument("semigroup");
  if (!phi) return null_argument("phi");
  if (!out) return null_argument("out");
  return guarded([&] { *out = op->op->value(s, x, t, phi->f); });
}

mbr_status mbr_semigroup_apply(const mbr_semigroup* op, double s, double t, const mbr_function* phi, const double* xs,
                               size_t n, double* out) {
  if (!op) return null_argument("semigroup");
  if (!phi) return null_argument("phi");
  if (n > 0 && (!xs || !out)) return null_argument("xs/out");
  return guarded([&] {
    const std::vector<double> v = op->op->apply(s, t, phi->f, std::vector<double>(xs, xs + n));
    std::copy(v.begin(), v.end(), out);
  });
}

mbr_status mbr_skew_density(double alpha, double sigma, double dt, double x, double y, double* out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    if (!(alpha >= 0 && alpha <= 1) || !(sigma > 0))
      throw membrane::Error(membrane::ErrorCode::InvalidInput, "need alpha in [0,1] and sigma > 0");
    *out = membrane::skew_density({alpha, sigma}, dt, x, y);
  });
}

}  // extern "C"
