// Command-line front end. Talks to the solver only through the C API.
#include <cstdio>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cavity/cavity.h"

namespace {

int exit_code(cav_status s) {
  switch (s) {
    case CAV_OK: return 0;
    case CAV_ERR_NOT_CONVERGED:
    case CAV_ERR_SOLVER:
    case CAV_ERR_AMBIGUOUS: return 2;
    case CAV_ERR_CONFIG:
    case CAV_ERR_INVALID_ARGUMENT:
    case CAV_ERR_DOMAIN: return 3;
    case CAV_ERR_IO: return 4;
    default: return 1;
  }
}

int report_error(cav_status s) {
  std::fprintf(stderr, "error (%s): %s\n", cav_status_name(s), cav_last_error());
  return exit_code(s);
}

struct Overrides {
  std::string config;
  std::optional<double> lambda, rho0, epsilon;
  std::optional<unsigned> threads;
  std::string method, out;
  bool timing = false;
  bool trace = false;
};

// Builds the effective config: file (or defaults), then flag overrides.
cav_status load_config(const Overrides& o, cav_config** cfg) {
  cav_status s = o.config.empty() ? cav_config_default(cfg) : cav_config_from_file(o.config.c_str(), cfg);
  if (s != CAV_OK) return s;
  auto chain = [&](cav_status next) {
    if (s == CAV_OK) s = next;
  };
  if (o.lambda) chain(cav_config_set_number(*cfg, "solver.lambda", *o.lambda));
  if (o.rho0) {
    chain(cav_config_set_number(*cfg, "density.rho0", *o.rho0));
    chain(cav_config_set_string(*cfg, "density.profile_csv", ""));
    chain(cav_config_set_number(*cfg, "critical.rho0", *o.rho0));
  }
  if (o.epsilon) chain(cav_config_set_number(*cfg, "solver.epsilon", *o.epsilon));
  if (!o.method.empty()) chain(cav_config_set_string(*cfg, "solver.method", o.method.c_str()));
  if (!o.out.empty()) chain(cav_config_set_string(*cfg, "output.dir", o.out.c_str()));
  if (o.threads) chain(cav_config_set_number(*cfg, "sweep.threads", *o.threads));
  if (o.timing) chain(cav_config_set_bool(*cfg, "output.timing", 1));
  if (s != CAV_OK) {
    cav_config_free(*cfg);
    *cfg = nullptr;
  }
  return s;
}

std::string output_dir(const cav_config* cfg) {
  char buf[4096];
  if (cav_config_get_string(cfg, "output.dir", buf, sizeof buf) != CAV_OK) return {};
  return buf;
}

int print_report(cav_status s, char* json) {
  if (json) {
    std::fputs(json, stdout);
    cav_string_free(json);
  }
  if (s != CAV_OK) return report_error(s);
  return 0;
}

int run_solve(cav_config* cfg) {
  cav_solution* sol = nullptr;
  cav_status s = cav_solve(cfg, &sol);
  if (!sol) return report_error(s);
  char* rep = nullptr;
  cav_solution_report(sol, &rep);
  std::fputs(rep, stdout);
  cav_string_free(rep);
  std::string dir = output_dir(cfg);
  if (!dir.empty()) {
    cav_status w = cav_solution_write_outputs(sol, dir.c_str());
    if (w != CAV_OK) {
      cav_solution_free(sol);
      return report_error(w);
    }
  }
  cav_solution_free(sol);
  return s == CAV_OK ? 0 : report_error(s);
}

int run_sweep(cav_config* cfg) {
  cav_table* table = nullptr;
  cav_status s = cav_sweep(cfg, &table);
  if (s != CAV_OK) return report_error(s);
  std::size_t n = cav_table_size(table), failed = 0;
  std::printf("lambda,rho0,cavity,energy,status\n");
  for (std::size_t i = 0; i < n; ++i) {
    cav_record r;
    cav_table_record(table, i, &r);
    if (!r.converged) ++failed;
    std::printf("%.6g,%.6g,%.8g,%.8g,%s\n", r.lambda, r.rho0, r.cavity, r.energy, r.status);
  }
  std::string dir = output_dir(cfg);
  if (!dir.empty()) {
    cav_status w = cav_table_emit(table, dir.c_str());
    if (w != CAV_OK) {
      cav_table_free(table);
      return report_error(w);
    }
  }
  cav_table_free(table);
  if (failed) std::fprintf(stderr, "%zu of %zu points did not converge\n", failed, n);
  return failed ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radial cavitation in a self-gravitating elastic ball"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  Overrides o;
  app.add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--lambda", o.lambda, "outer boundary displacement");
  app.add_option("--rho0", o.rho0, "constant reference density");
  app.add_option("--epsilon", o.epsilon, "inner cutoff radius");
  app.add_option("--method", o.method, "shoot, flow or hybrid");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--threads", o.threads, "sweep worker threads");
  app.add_flag("--timing", o.timing, "record wall-clock times in records.csv");
  bool print_config = false;
  app.add_flag("--print-config", print_config, "print the effective config and exit");

  auto* solve = app.add_subcommand("solve", "single (lambda, rho0) solve");
  auto* sweep = app.add_subcommand("sweep", "(lambda, rho0) surface sweep");
  auto* critical = app.add_subcommand("critical", "critical displacement by bisection");
  auto* freeb = app.add_subcommand("free-boundary", "traction-free outer surface, intact centre");
  auto* validate = app.add_subcommand("validate", "material hypothesis and consistency checks");
  auto* oracle = app.add_subcommand("oracle", "gravitational energy quadrature cross-check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }
  if (!print_config && app.get_subcommands().empty()) {
    std::fprintf(stderr, "A subcommand is required\n%s", app.help().c_str());
    return 3;
  }

  cav_config* cfg = nullptr;
  cav_status s = load_config(o, &cfg);
  if (s != CAV_OK) return report_error(s);
  if (print_config) {
    char* text = nullptr;
    cav_config_to_json(cfg, &text);
    std::fputs(text, stdout);
    cav_string_free(text);
    cav_config_free(cfg);
    return 0;
  }

  int rc = 0;
  char* report = nullptr;
  if (solve->parsed()) {
    rc = run_solve(cfg);
  } else if (sweep->parsed()) {
    rc = run_sweep(cfg);
  } else if (critical->parsed()) {
    s = cav_critical(cfg, &report);
    rc = print_report(s, report);
  } else if (freeb->parsed()) {
    s = cav_free_boundary(cfg, &report);
    rc = print_report(s, report);
  } else if (validate->parsed()) {
    s = cav_validate(cfg, &report);
    rc = print_report(s, report);
  } else if (oracle->parsed()) {
    s = cav_oracle(cfg, &report);
    rc = print_report(s, report);
  }
  cav_config_free(cfg);
  return rc;
}
