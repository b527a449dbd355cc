#include "cavity/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <thread>

#include "cavity/error.hpp"
#include "json.hpp"

namespace cavity {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double density_label(const DensityProfile& p) { return p.is_constant() ? p(0.0) : p.k1(); }

// JSON has no NaN; emit null instead.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }
json num(const std::optional<double>& x) { return x ? num(*x) : json(nullptr); }

json record_json(const SweepRecord& r) {
  return {{"lambda", r.lambda}, {"rho0", r.rho0},         {"cavity", num(r.cavity)},
          {"energy", num(r.energy)}, {"nu", num(r.nu)}, {"status", r.status},
          {"method", r.method}, {"wall_time_s", r.wall_time_s}};
}

json check_json(const CheckResult& c) {
  return {{"name", c.name}, {"passed", c.passed}, {"value", num(c.value)}, {"detail", c.detail}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

}  // namespace

SolveRequest SolveRequest::from_config(const Config& cfg) {
  SolveRequest req(cfg.make_model(), cfg.make_density(), cfg.solver);
  req.timing = cfg.output.timing;
  req.trace = cfg.output.trace;
  return req;
}

SolveOutcome solve(const SolveRequest& req) {
  const auto t0 = Clock::now();
  const StoredEnergy& model = *req.model;
  const DensityProfile& profile = req.density;
  const SolverConfig& sc = req.solver;

  SolveOutcome out;
  out.epsilon = sc.epsilon;
  out.record.lambda = sc.lambda;
  out.record.rho0 = density_label(profile);
  out.record.method = to_string(sc.method);
  const std::vector<double> grid = canonical_grid(sc.grid_nodes, sc.epsilon, sc.grid_ratio);

  bool flow_ok = false;
  std::optional<double> flow_nu;
  if (sc.method != Method::shoot) {
    FlowConfig fc;
    fc.grid = grid;
    fc.lambda = sc.lambda;
    fc.dt = sc.flow.dt;
    fc.max_dt = sc.flow.max_dt;
    fc.max_steps = sc.flow.max_steps;
    fc.stop_tol = sc.flow.stop_tol;
    fc.metric = sc.flow.metric;
    fc.record_trace = req.trace;
    try {
      FlowState fs = flow_minimize(model, profile, fc);
      flow_ok = fs.converged;
      out.flow_stop = fs.stop;
      out.flow_steps = fs.step_index;
      out.flow_energy = fs.energy_history.back();
      flow_nu = fs.field.interval_slope(fs.field.size() - 2);
      out.trace = std::move(fs.trace);
      out.flow_field = std::move(fs.field);
      if (!flow_ok) out.notes.push_back(std::string("flow stopped: ") + to_string(*out.flow_stop));
    } catch (const Error& e) {
      out.notes.push_back(std::string("flow failed: ") + e.what());
    }
  }

  std::optional<RadialField> shoot_field;
  double shoot_nu = kNaN;
  bool shoot_ok = false;
  if (sc.method != Method::flow) {
    ShootingOptions so;
    so.rtol = sc.rtol;
    so.atol = sc.atol;
    so.max_steps = sc.max_ode_steps;
    so.residual_tol = sc.residual_tol;
    so.grid_nodes = sc.grid_nodes;
    so.grid_ratio = sc.grid_ratio;
    so.predictor = flow_nu ? *flow_nu : req.warm_nu.value_or(sc.lambda);
    if (req.warm_nu && flow_nu)
      so.bracket = std::minmax(*req.warm_nu, *flow_nu);
    try {
      ShootingResult sr = solve_shooting(model, profile, sc.lambda, sc.epsilon, so);
      out.shoot_status = sr.status;
      out.shoot_iterations = sr.iterations;
      out.residual = sr.residual;
      shoot_ok = sr.converged();
      shoot_nu = sr.nu_star;
      shoot_field = std::move(sr.field);
      if (shoot_field) out.shoot_energy = total_energy(model, profile, *shoot_field);
      if (!shoot_ok) out.notes.push_back("shooting: " + std::string(to_string(sr.status)) +
                                         (sr.message.empty() ? "" : " (" + sr.message + ")"));
    } catch (const Error& e) {
      out.notes.push_back(std::string("shooting failed: ") + e.what());
    }
  }

  auto& rec = out.record;
  switch (sc.method) {
    case Method::shoot:
      out.field = shoot_field;
      rec.nu = shoot_nu;
      rec.status = shoot_ok ? "converged"
                            : (out.shoot_status ? to_string(*out.shoot_status) : "failed");
      break;
    case Method::flow:
      out.field = out.flow_field;
      rec.nu = flow_nu.value_or(kNaN);
      rec.status = out.flow_field ? (flow_ok ? "converged" : "unconverged") : "failed";
      break;
    case Method::hybrid:
      if (shoot_field && out.flow_field) {
        out.sup_distance = shoot_field->sup_distance(*out.flow_field);
      }
      if (shoot_ok) {
        out.field = shoot_field;
        rec.nu = shoot_nu;
        rec.status = "converged";
        if (out.flow_energy && out.shoot_energy && out.sup_distance &&
            (std::abs(*out.flow_energy - *out.shoot_energy) > kHybridEnergyGap ||
             *out.sup_distance > kHybridFieldGap)) {
          out.flagged = true;
          rec.status = "flagged";
          out.notes.push_back("flow and shooting disagree beyond the hybrid thresholds");
        }
      } else if (flow_ok) {
        out.field = out.flow_field;
        rec.nu = flow_nu.value_or(kNaN);
        rec.status = "flow_only";
      } else {
        out.field = out.flow_field;
        rec.nu = flow_nu.value_or(kNaN);
        rec.status = "failed";
      }
      break;
  }

  if (out.field) {
    rec.cavity = out.field->cavity();
    rec.energy = total_energy(model, profile, *out.field);
    out.el_residual = el_residual(model, profile, *out.field);
    if (rec.cavity < kCavityNoteThreshold)
      out.notes.push_back(
          "r(eps) below the cavitation threshold: the steep inner layer at R=eps comes from "
          "the zero-stress condition on the truncated domain, not from a cavity");
  } else {
    rec.cavity = kNaN;
    rec.energy = kNaN;
  }
  out.elapsed_s = seconds_since(t0);
  rec.wall_time_s = req.timing ? out.elapsed_s : 0.0;
  return out;
}

std::string SolveOutcome::to_json() const {
  json j = record_json(record);
  j["epsilon"] = epsilon;
  j["flow_energy"] = num(flow_energy);
  j["shoot_energy"] = num(shoot_energy);
  j["sup_distance"] = num(sup_distance);
  j["residual"] = num(residual);
  j["el_residual"] = num(el_residual);
  j["flow_stop"] = flow_stop ? json(to_string(*flow_stop)) : json(nullptr);
  j["flow_steps"] = flow_steps;
  j["shoot_status"] = shoot_status ? json(to_string(*shoot_status)) : json(nullptr);
  j["shoot_iterations"] = shoot_iterations;
  j["flagged"] = flagged;
  j["notes"] = notes;
  return j.dump(2) + "\n";
}

SweepTable single_table(const SolveOutcome& outcome) {
  SweepTable t;
  t.lambdas = {outcome.record.lambda};
  t.rho0s = {outcome.record.rho0};
  t.records = {outcome.record};
  t.fields = {outcome.field};
  return t;
}

SweepTable sweep(const Config& cfg, const std::function<void(const SweepRecord&)>& on_record) {
  cfg.validate();
  SweepTable table;
  table.lambdas = cfg.sweep.lambdas();
  table.rho0s = cfg.sweep.rho0s();
  const std::size_t nl = table.lambdas.size(), nr = table.rho0s.size();
  table.records.resize(nl * nr);
  table.fields.resize(nl * nr);
  const auto model = cfg.make_model();

  auto run_row = [&](std::size_t i) {
    std::optional<double> warm;
    for (std::size_t j = 0; j < nl; ++j) {
      SolverConfig sc = cfg.solver;
      sc.lambda = table.lambdas[j];
      SolveRequest req(model, DensityProfile::constant(table.rho0s[i]), sc);
      req.timing = cfg.output.timing;
      req.warm_nu = warm;
      SweepRecord& rec = table.records[table.index(i, j)];
      try {
        SolveOutcome o = solve(req);
        rec = o.record;
        table.fields[table.index(i, j)] = std::move(o.field);
        if (rec.converged()) warm = rec.nu;
      } catch (const std::exception& e) {
        rec = SweepRecord{sc.lambda, table.rho0s[i], kNaN, kNaN, kNaN, "failed",
                          to_string(sc.method), 0.0};
      }
    }
  };

  unsigned threads = cfg.sweep.threads ? cfg.sweep.threads : std::thread::hardware_concurrency();
  threads = std::clamp<unsigned>(threads, 1u, static_cast<unsigned>(nr));
  if (threads == 1) {
    for (std::size_t i = 0; i < nr; ++i) run_row(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < nr; i = next++) run_row(i);
      });
    for (auto& th : pool) th.join();
  }
  if (on_record)
    for (const auto& r : table.records) on_record(r);
  return table;
}

CriticalResult find_critical_lambda(const Config& cfg, double rho0) {
  cfg.validate();
  const auto& q = cfg.critical;
  const auto model = cfg.make_model();
  CriticalResult res;
  res.rho0 = rho0;
  if (auto f = model->no_cavitation_floor()) res.floor = *f;

  std::optional<double> warm;
  auto cavity_at = [&](double lambda) {
    SolverConfig sc = cfg.solver;
    sc.lambda = lambda;
    SolveRequest req(model, DensityProfile::constant(rho0), sc);
    req.warm_nu = warm;
    SolveOutcome o = solve(req);
    ++res.solves;
    if (!o.field || !(o.record.converged() || o.record.status == "flow_only"))
      throw SolverError("critical: solve failed at lambda=" + fmt("%.6g", lambda) + " (" +
                        o.record.status + ")");
    if (o.record.converged()) warm = o.record.nu;
    res.samples.emplace_back(lambda, o.record.cavity);
    return o.record.cavity;
  };

  std::vector<double> grid(q.samples);
  std::vector<bool> open(q.samples);
  for (std::size_t k = 0; k < q.samples; ++k) {
    grid[k] = q.lambda_lo + (q.lambda_hi - q.lambda_lo) * static_cast<double>(k) /
                                static_cast<double>(q.samples - 1);
    open[k] = cavity_at(grid[k]) >= q.c_tol;
  }
  auto listing = [&] {
    std::string s;
    for (auto [l, c] : res.samples) s += " (" + fmt("%.6g", l) + ", " + fmt("%.6g", c) + ")";
    return s;
  };
  if (open.front() || !open.back())
    throw AmbiguityError("critical: need r(eps) < c_tol at lambda_lo and >= c_tol at lambda_hi;"
                         " samples:" + listing());
  std::size_t first = 0;
  while (!open[first]) ++first;
  for (std::size_t k = first; k < q.samples; ++k)
    if (!open[k]) throw AmbiguityError("critical: indicator not monotone; samples:" + listing());

  double lo = grid[first - 1], hi = grid[first];
  warm.reset();
  while (hi - lo > q.tol) {
    double mid = 0.5 * (lo + hi);
    (cavity_at(mid) >= q.c_tol ? hi : lo) = mid;
  }
  res.lo = lo;
  res.hi = hi;
  res.lambda_c = 0.5 * (lo + hi);
  return res;
}

std::string CriticalResult::to_json() const {
  json s = json::array();
  for (auto [l, c] : samples) s.push_back({{"lambda", l}, {"cavity", num(c)}});
  json j = {{"rho0", rho0},         {"lambda_c", lambda_c}, {"lo", lo}, {"hi", hi},
            {"floor", num(floor)},  {"solves", solves},     {"samples", s}};
  return j.dump(2) + "\n";
}

FreeBoundaryOutcome free_boundary(const Config& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  const auto model = cfg.make_model();
  const DensityProfile profile = cfg.make_density();
  ShootingOptions so;
  so.rtol = cfg.solver.rtol;
  so.atol = cfg.solver.atol;
  so.max_steps = cfg.solver.max_ode_steps;
  so.grid_nodes = cfg.solver.grid_nodes;
  so.grid_ratio = cfg.solver.grid_ratio;
  FreeBoundaryOutcome out;
  out.result = solve_free_boundary(*model, profile, cfg.solver.epsilon, so);
  out.energy = out.result.field ? total_energy(*model, profile, *out.result.field) : kNaN;
  out.elapsed_s = seconds_since(t0);
  return out;
}

std::string FreeBoundaryOutcome::to_json() const {
  const auto& r = result;
  json j = {{"lambda", r.lambda},
            {"nu", r.nu},
            {"cavity", r.field ? num(r.field->cavity()) : json(nullptr)},
            {"defect", r.defect},
            {"energy", num(energy)},
            {"iterations", r.iterations},
            {"status", to_string(r.status)},
            {"message", r.message}};
  return j.dump(2) + "\n";
}

OracleReport oracle_check(const Config& cfg, const QuadSpec& quad) {
  cfg.validate();
  const DensityProfile profile = cfg.make_density();
  OracleReport rep;
  auto add = [&](std::string name, const RadialField& f) {
    OracleCase c;
    c.name = std::move(name);
    c.potential = potential_energy(profile, f);
    c.brute = brute_force_potential(profile, f, quad) / (4.0 * std::numbers::pi);
    c.abs_error = std::abs(c.brute - c.potential);
    c.rel_error = c.potential != 0.0 ? c.abs_error / std::abs(c.potential) : c.abs_error;
    rep.cases.push_back(std::move(c));
  };
  const auto uniform = uniform_grid(cfg.solver.grid_nodes, 0.0);
  add("identity", affine_map(1.0, uniform));
  if (cfg.solver.lambda >= 1.0)
    add("incompressible", incompressible_map(cfg.solver.lambda, uniform));
  SolveOutcome o = solve(SolveRequest::from_config(cfg));
  if (o.field) add("solved", *o.field);
  return rep;
}

std::string OracleReport::to_json() const {
  json arr = json::array();
  for (const auto& c : cases)
    arr.push_back({{"name", c.name},
                   {"potential", c.potential},
                   {"brute_force", c.brute},
                   {"abs_error", c.abs_error},
                   {"rel_error", c.rel_error}});
  return json{{"cases", arr}}.dump(2) + "\n";
}

ValidationReport validate(const Config& cfg) {
  cfg.validate();
  const auto model = cfg.make_model();
  ValidationReport rep;
  rep.growth = validate_growth(*model);
  rep.stress_free = check_stress_free(*model, 1e-12);
  rep.baker_ericksen = check_baker_ericksen(*model, 100, 2024);
  rep.derivatives = check_derivatives(*model, 100, 1e-5, 2024);
  return rep;
}

bool ValidationReport::all_passed() const {
  return growth.all_passed() && stress_free.passed && baker_ericksen.passed &&
         derivatives.passed;
}

std::string ValidationReport::to_json() const {
  json checks = json::array();
  for (const auto& c : growth.checks) checks.push_back(check_json(c));
  checks.push_back(check_json(stress_free));
  checks.push_back(check_json(baker_ericksen));
  checks.push_back(check_json(derivatives));
  json j = {{"checks", checks},
            {"derivative_ratio", num(growth.derivative_ratio)},
            {"all_passed", all_passed()}};
  return j.dump(2) + "\n";
}

std::string records_csv(const std::vector<SweepRecord>& records) {
  std::string out = std::string(kRecordsHeader) + "\n";
  for (const auto& r : records)
    out += csv_row({r.lambda, r.rho0, r.cavity, r.energy, r.nu}) + ',' + r.status + ',' + r.method +
           ',' + fmt("%.6f", r.wall_time_s) + '\n';
  return out;
}

void emit_plots(const SweepTable& table, const StoredEnergy& model,
                const std::filesystem::path& dir, bool profiles) {
  if (table.records.empty()) throw InvalidParameter("emit_plots: empty table");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory " + dir.string());

  write_text(dir / "records.csv", records_csv(table.records));

  auto surface = [&](auto value) {
    std::string s = "rho0/lambda";
    for (double l : table.lambdas) s += "," + format_double(l);
    s += "\n";
    for (std::size_t i = 0; i < table.rho0s.size(); ++i) {
      s += format_double(table.rho0s[i]);
      for (std::size_t j = 0; j < table.lambdas.size(); ++j)
        s += "," + format_double(value(table.at(i, j)));
      s += "\n";
    }
    return s;
  };
  write_text(dir / "surface_cavity.csv", surface([](const SweepRecord& r) { return r.cavity; }));
  write_text(dir / "surface_energy.csv", surface([](const SweepRecord& r) { return r.energy; }));

  std::vector<std::string> names;
  if (profiles) {
    for (std::size_t k = 0; k < table.records.size(); ++k) {
      if (!table.fields[k]) continue;
      const auto& r = table.records[k];
      std::string name = "profile_" + fmt("%.4f", r.lambda) + "_" + fmt("%.4f", r.rho0) + ".csv";
      write_field_csv(model, *table.fields[k], dir / name);
      names.push_back(name);
    }
  }

  std::string gp =
      "set datafile separator ','\n"
      "set terminal pngcairo size 900,700\n"
      "set xlabel 'lambda'\nset ylabel 'rho0'\n"
      "set dgrid3d " + std::to_string(table.rho0s.size()) + "," +
      std::to_string(table.lambdas.size()) + "\n"
      "set output 'cavity.png'\n"
      "splot 'records.csv' every ::1 using 1:2:3 with lines title 'r(eps)'\n"
      "set output 'energy.png'\n"
      "splot 'records.csv' every ::1 using 1:2:4 with lines title 'energy'\n";
  write_text(dir / "surfaces.gp", gp);

  std::string pp =
      "set datafile separator ','\n"
      "set terminal pngcairo size 900,700\n"
      "set key autotitle columnhead\n"
      "set logscale x\nset xlabel 'R'\n";
  for (const auto& n : names) {
    std::string stem = n.substr(0, n.size() - 4);
    pp += "set output '" + stem + ".png'\n"
          "plot '" + n + "' using 1:2 with lines, '' using 1:3 with lines, "
          "'' using 1:4 with lines, '' using 1:5 with lines, '' using 1:6 with lines\n";
  }
  write_text(dir / "profiles.gp", pp);
}

}  // namespace cavity
