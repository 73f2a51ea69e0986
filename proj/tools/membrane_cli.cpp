#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "membrane/membrane.h"

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kInvalid = 2, kSolver = 3, kIo = 4 };

int exit_for(mbr_status st) {
  switch (st) {
    case MBR_OK:
      return kOk;
    case MBR_INVALID_INPUT:
    case MBR_NONPARABOLIC_COEFFICIENT:
    case MBR_DEGENERATE_WENTZELL:
    case MBR_ATOM_ON_MEMBRANE:
    case MBR_TIME_ORDER:
    case MBR_MEASURE_NOT_NULL:
    case MBR_NULL_ARGUMENT:
      return kInvalid;
    case MBR_IO:
      return kIo;
    default:
      return kSolver;
  }
}

int fail(mbr_status st) {
  std::cerr << "error: " << mbr_status_name(st) << ": " << mbr_last_error() << "\n";
  return exit_for(st);
}

struct Owned {
  char* p = nullptr;
  ~Owned() { mbr_string_free(p); }
};

// Writes to path, or stdout when path is empty.
bool emit(const std::string& path, const char* text) {
  if (path.empty()) {
    std::fputs(text, stdout);
    return std::fflush(stdout) == 0;
  }
  std::ofstream f(path, std::ios::binary);
  f << text;
  f.close();
  if (!f) {
    std::cerr << "error: Io: cannot write " << path << "\n";
    return false;
  }
  return true;
}

struct Options {
  std::string config;
  std::string out;
  std::string dump_kernels;
  std::string suite;
  int threads = 0;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-parameter semigroup of a diffusion with a moving membrane"};
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App* cmd) {
    cmd->add_option("--config", o.config, "run configuration (JSON)")->required();
    cmd->add_option("--out", o.out, "output file (default stdout)");
    cmd->add_option("--threads", o.threads, "cap on worker threads")->check(CLI::NonNegativeNumber);
    cmd->add_option("--dump-kernels", o.dump_kernels, "write kernel tables and densities as JSON");
    cmd->add_option("--seed", o.seed, "override mc.seed");
    cmd->add_option("--paths", o.paths, "override mc.paths")->check(CLI::PositiveNumber);
  };
  CLI::App* solve = app.add_subcommand("solve", "tabulate T_st phi as CSV");
  CLI::App* check = app.add_subcommand("check", "run a check suite, JSON report");
  CLI::App* mc = app.add_subcommand("compare-mc", "solver against particle simulation, JSON report");
  CLI::App* validate = app.add_subcommand("validate", "check the problem conditions, JSON report");
  for (CLI::App* cmd : {solve, check, mc, validate}) common(cmd);
  check->add_option("--suite", o.suite, "semigroup, conjugation, generator or parametrix")
      ->required()
      ->check(CLI::IsMember({"semigroup", "conjugation", "generator", "parametrix"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }

  mbr_set_threads(o.threads);
  mbr_config* cfg = nullptr;
  if (mbr_status st = mbr_config_load(o.config.c_str(), &cfg); st != MBR_OK) return fail(st);
  std::unique_ptr<mbr_config, decltype(&mbr_config_free)> guard(cfg, &mbr_config_free);
  if (o.seed) mbr_config_set_seed(cfg, *o.seed);
  if (o.paths) {
    if (mbr_status st = mbr_config_set_paths(cfg, *o.paths); st != MBR_OK) return fail(st);
  }

  if (!o.dump_kernels.empty()) {
    Owned dump;
    if (mbr_status st = mbr_dump_kernels(cfg, &dump.p); st != MBR_OK) return fail(st);
    if (!emit(o.dump_kernels, dump.p)) return kIo;
  }

  Owned text;
  int pass = 1;
  mbr_status st = MBR_OK;
  if (*solve) {
    st = mbr_solve_csv(cfg, &text.p);
  } else if (*check) {
    st = mbr_check(cfg, o.suite.c_str(), &text.p, &pass);
  } else if (*mc) {
    st = mbr_compare_mc(cfg, &text.p, &pass);
  } else {
    st = mbr_validate(cfg, &text.p, &pass);
  }
  if (st != MBR_OK) return fail(st);
  if (!emit(o.out, text.p)) return kIo;
  if (pass) return kOk;
  return *validate ? kInvalid : kCheckFailed;
}
