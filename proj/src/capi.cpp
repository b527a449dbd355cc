#include "cavity/cavity.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include "cavity/config.hpp"
#include "cavity/error.hpp"
#include "cavity/pipeline.hpp"
#include "json.hpp"

using nlohmann::json;

struct cav_config {
  json doc;
  cavity::Config cfg;
};

struct cav_solution {
  cavity::Config cfg;
  std::shared_ptr<const cavity::StoredEnergy> model;
  cavity::SolveOutcome outcome;
};

struct cav_table {
  std::shared_ptr<const cavity::StoredEnergy> model;
  cavity::SweepTable table;
  bool profiles = true;
};

namespace {

thread_local std::string g_last_error;

cav_status fail(cav_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
cav_status guarded(F&& body) {
  g_last_error.clear();
  try {
    return body();
  } catch (const cavity::ConfigError& e) {
    return fail(CAV_ERR_CONFIG, e.what());
  } catch (const cavity::IoError& e) {
    return fail(CAV_ERR_IO, e.what());
  } catch (const cavity::DomainError& e) {
    return fail(CAV_ERR_DOMAIN, e.what());
  } catch (const cavity::AmbiguityError& e) {
    return fail(CAV_ERR_AMBIGUOUS, e.what());
  } catch (const cavity::InvalidParameter& e) {
    return fail(CAV_ERR_INVALID_ARGUMENT, e.what());
  } catch (const cavity::Error& e) {
    return fail(CAV_ERR_SOLVER, e.what());
  } catch (const std::exception& e) {
    return fail(CAV_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CAV_ERR_INTERNAL, "unknown exception");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json::json_pointer key_pointer(const char* key) {
  std::string p = "/";
  for (const char* c = key; *c; ++c) p += *c == '.' ? '/' : *c;
  return json::json_pointer(p);
}

// Applies one edit to the config document; the edit is rolled back when
// the result does not validate.
template <class V>
cav_status set_key(cav_config* cfg, const char* key, V value) {
  if (!cfg || !key) return fail(CAV_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto ptr = key_pointer(key);
    if (!cfg->doc.contains(ptr)) throw cavity::ConfigError(std::string("unknown key ") + key);
    json edited = cfg->doc;
    edited[ptr] = value;
    cavity::Config parsed = cavity::Config::from_json(edited.dump());
    cfg->cfg = parsed;
    cfg->doc = json::parse(parsed.to_json());
    return CAV_OK;
  });
}

void fill_record(const cavity::SweepRecord& r, cav_record* out) {
  out->lambda = r.lambda;
  out->rho0 = r.rho0;
  out->cavity = r.cavity;
  out->energy = r.energy;
  out->nu = r.nu;
  out->wall_time_s = r.wall_time_s;
  out->converged = r.converged() ? 1 : 0;
  std::snprintf(out->status, sizeof out->status, "%s", r.status.c_str());
  std::snprintf(out->method, sizeof out->method, "%s", r.method.c_str());
}

cav_config* make_config(cavity::Config c) {
  auto* h = new cav_config;
  h->doc = json::parse(c.to_json());
  h->cfg = std::move(c);
  return h;
}

}  // namespace

extern "C" {

const char* cav_last_error(void) { return g_last_error.c_str(); }

const char* cav_status_name(cav_status status) {
  switch (status) {
    case CAV_OK: return "ok";
    case CAV_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case CAV_ERR_CONFIG: return "config_error";
    case CAV_ERR_IO: return "io_error";
    case CAV_ERR_DOMAIN: return "domain_error";
    case CAV_ERR_SOLVER: return "solver_error";
    case CAV_ERR_NOT_CONVERGED: return "not_converged";
    case CAV_ERR_AMBIGUOUS: return "ambiguous";
    case CAV_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* cav_version(void) { return "1.0.0"; }

void cav_string_free(char* s) { std::free(s); }

cav_status cav_config_default(cav_config** out) {
  if (!out) return fail(CAV_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = make_config(cavity::Config{});
    return CAV_OK;
  });
}

cav_status cav_config_from_json(const char* text, cav_config** out) {
  if (!text || !out) return fail(CAV_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = make_config(cavity::Config::from_json(text));
    return CAV_OK;
  });
}

cav_status cav_config_from_file(const char* path, cav_config** out) {
  if (!path || !out) return fail(CAV_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = make_config(cavity::Config::from_file(path));
    return CAV_OK;
  });
}

cav_status cav_config_set_number(cav_config* cfg, const char* key, double value) {
  return set_key(cfg, key, value);
}

cav_status cav_config_set_string(cav_config* cfg, const char* key, const char* value) {
  if (!value) return fail(CAV_ERR_INVALID_ARGUMENT, "null argument");
  return set_key(cfg, key, std::string(value));
}

cav_status cav_config_set_bool(cav_config* cfg, const char* key, int value) {
  return set_key(cfg, key, value != 0);
}

cav_status cav_config_get_string(const cav_config* cfg, const char* key, char* buf, size_t size) {
  if (!cfg || !key || !buf) return fail(CAV_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto ptr = key_pointer(key);
    if (!cfg->doc.contains(ptr) || !cfg->doc[ptr].is_string())
      throw cavity::ConfigError(std::string("no string key ") + key);
    const std::string v = cfg->doc[ptr].get<std::string>();
    if (size > 0) std::snprintf(buf, size, "%s", v.c_str());
    if (v.size() >= size) throw cavity::InvalidParameter("buffer too small");
    return CAV_OK;
  });
}

cav_status cav_config_get_number(const cav_config* cfg, const char* key, double* out) {
  if (!cfg || !key || !out) return fail(CAV_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto ptr = key_pointer(key);
    if (!cfg->doc.contains(ptr) || !cfg->doc[ptr].is_number())
      throw cavity::ConfigError(std::string("no numeric key ") + key);
    *out = cfg->doc[ptr].get<double>();
    return CAV_OK;
  });
}

cav_status cav_config_to_json(const cav_config* cfg, char** out) {
  if (!cfg || !out) return fail(CAV_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = dup_string(cfg->cfg.to_json());
    return CAV_OK;
  });
}

void cav_config_free(cav_config* cfg) { delete cfg; }

cav_status cav_solve(const cav_config* cfg, cav_solution** out) {
  if (!cfg || !out) return fail(CAV_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto sol = std::make_unique<cav_solution>();
    sol->cfg = cfg->cfg;
    auto req = cavity::SolveRequest::from_config(cfg->cfg);
    sol->model = req.model;
    sol->outcome = cavity::solve(req);
    const bool ok = sol->outcome.record.converged();
    std::string status = sol->outcome.record.status;
    *out = sol.release();
    return ok ? CAV_OK : fail(CAV_ERR_NOT_CONVERGED, "solve finished with status " + status);
  });
}

cav_status cav_solution_record(const cav_solution* sol, cav_record* out) {
  if (!sol || !out) return fail(CAV_ERR_INVALID_ARGUMENT, "null argument");
  fill_record(sol->outcome.record, out);
  return CAV_OK;
}

cav_status cav_solution_report(const cav_solution* sol, char** json_out) {
  if (!sol || !json_out) return fail(CAV_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *json_out = dup_string(sol->outcome.to_json());
    return CAV_OK;
  });
}

size_t cav_solution_size(const cav_solution* sol) {
  return sol && sol->outcome.field ? sol->outcome.field->size() : 0;
}

cav_status cav_solution_field(const cav_solution* sol, double* R, double* r, size_t n) {
  if (!sol || !R || !r) return fail(CAV_ERR_INVALID_ARGUMENT, "null argument");
  if (!sol->outcome.field) return fail(CAV_ERR_SOLVER, "solution has no field");
  const auto& f = *sol->outcome.field;
  if (n < f.size()) return fail(CAV_ERR_INVALID_ARGUMENT, "buffer too small");
  for (size_t i = 0; i < f.size(); ++i) {
    R[i] = f.nodes()[i];
    r[i] = f.values()[i];
  }
  return CAV_OK;
}

cav_status cav_solution_write_outputs(const cav_solution* sol, const char* dir) {
  if (!sol || !dir) return fail(CAV_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const std::filesystem::path d(dir);
    cavity::emit_plots(cavity::single_table(sol->outcome), *sol->model, d,
                       sol->cfg.output.profiles);
    std::ofstream rep(d / "report.json", std::ios::binary);
    if (!rep) throw cavity::IoError("cannot write " + (d / "report.json").string());
    rep << sol->outcome.to_json();
    if (!sol->outcome.trace.empty()) cavity::write_flow_trace(sol->outcome.trace, d / "trace.csv");
    return CAV_OK;
  });
}

void cav_solution_free(cav_solution* sol) { delete sol; }

cav_status cav_sweep(const cav_config* cfg, cav_table** out) {
  if (!cfg || !out) return fail(CAV_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto t = std::make_unique<cav_table>();
    t->model = cfg->cfg.make_model();
    t->table = cavity::sweep(cfg->cfg);
    t->profiles = cfg->cfg.output.profiles;
    *out = t.release();
    return CAV_OK;
  });
}

size_t cav_table_size(const cav_table* table) { return table ? table->table.records.size() : 0; }

cav_status cav_table_record(const cav_table* table, size_t index, cav_record* out) {
  if (!table || !out) return fail(CAV_ERR_INVALID_ARGUMENT, "null argument");
  if (index >= table->table.records.size()) return fail(CAV_ERR_INVALID_ARGUMENT, "index out of range");
  fill_record(table->table.records[index], out);
  return CAV_OK;
}

cav_status cav_table_emit(const cav_table* table, const char* dir) {
  if (!table || !dir) return fail(CAV_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    cavity::emit_plots(table->table, *table->model, dir, table->profiles);
    return CAV_OK;
  });
}

void cav_table_free(cav_table* table) { delete table; }

cav_status cav_critical(const cav_config* cfg, char** json_out) {
  if (!cfg || !json_out) return fail(CAV_ERR_INVALID_ARGUMENT, "null argument");
  *json_out = nullptr;
  return guarded([&] {
    json results = json::array();
    double prev = -1.0;
    bool nondecreasing = true;
    for (double rho : cfg->cfg.critical.rho0) {
      auto res = cavity::find_critical_lambda(cfg->cfg, rho);
      if (res.lambda_c < prev) nondecreasing = false;
      prev = res.lambda_c;
      results.push_back(json::parse(res.to_json()));
    }
    json doc = {{"results", results}, {"nondecreasing", nondecreasing}};
    *json_out = dup_string(doc.dump(2) + "\n");
    return CAV_OK;
  });
}

cav_status cav_free_boundary(const cav_config* cfg, char** json_out) {
  if (!cfg || !json_out) return fail(CAV_ERR_INVALID_ARGUMENT, "null argument");
  *json_out = nullptr;
  return guarded([&] {
    auto out = cavity::free_boundary(cfg->cfg);
    *json_out = dup_string(out.to_json());
    if (out.result.field && !cfg->cfg.output.dir.empty()) {
      std::error_code ec;
      std::filesystem::create_directories(cfg->cfg.output.dir, ec);
      if (ec) throw cavity::IoError("cannot create output directory " + cfg->cfg.output.dir);
      cavity::write_field_csv(*cfg->cfg.make_model(), *out.result.field,
                              std::filesystem::path(cfg->cfg.output.dir) / "free_boundary.csv");
    }
    return out.result.converged() ? CAV_OK
                                  : fail(CAV_ERR_NOT_CONVERGED, out.result.message);
  });
}

cav_status cav_validate(const cav_config* cfg, char** json_out) {
  if (!cfg || !json_out) return fail(CAV_ERR_INVALID_ARGUMENT, "null argument");
  *json_out = nullptr;
  return guarded([&] {
    *json_out = dup_string(cavity::validate(cfg->cfg).to_json());
    return CAV_OK;
  });
}

cav_status cav_oracle(const cav_config* cfg, char** json_out) {
  if (!cfg || !json_out) return fail(CAV_ERR_INVALID_ARGUMENT, "null argument");
  *json_out = nullptr;
  return guarded([&] {
    *json_out = dup_string(cavity::oracle_check(cfg->cfg).to_json());
    return CAV_OK;
  });
}

}  // extern "C"
