#include "cavity/gradient_flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "cavity/error.hpp"

namespace cavity {

const char* to_string(FlowMetric m) { return m == FlowMetric::h1 ? "h1" : "weighted"; }

FlowMetric flow_metric_from_string(const std::string& s) {
  if (s == "h1") return FlowMetric::h1;
  if (s == "weighted") return FlowMetric::weighted;
  throw ConfigError("unknown flow metric '" + s + "' (expected h1 or weighted)");
}

const char* to_string(FlowStop s) {
  switch (s) {
    case FlowStop::step_norm: return "step_norm";
    case FlowStop::stagnation: return "stagnation";
    case FlowStop::budget: return "budget";
    case FlowStop::step_collapse: return "step_collapse";
  }
  return "unknown";
}

Tridiagonal flow_metric_matrix(const StoredEnergy& model, const RadialField& field,
                               FlowMetric metric) {
  const auto R = field.nodes();
  const auto r = field.values();
  const std::size_t n = field.size() - 1;  // free nodes
  if (n == 0) throw GridError("flow_metric_matrix: need at least two nodes");
  Tridiagonal K;
  K.diag.assign(n, 0.0);
  K.lower.assign(n - 1, 0.0);
  K.upper.assign(n - 1, 0.0);
  for (std::size_t e = 0; e < n; ++e) {
    const double L = R[e + 1] - R[e];
    if (!(L > 0.0)) throw GridError("flow_metric_matrix: degenerate element");
    double w = 1.0;
    if (metric == FlowMetric::weighted) {
      const double v1 = (r[e + 1] - r[e]) / L;
      w = 0.0;
      for (double xi : {kGauss2Lo, kGauss2Hi}) {
        const double Rg = R[e] + xi * L;
        const double v2 = (r[e] + xi * (r[e + 1] - r[e])) / Rg;
        w += kGauss2Weight * Rg * Rg * model.partials(Rg, {v1, v2, v2}).phi11;
      }
      if (!(w > 0.0) || !std::isfinite(w))
        throw GridError("flow_metric_matrix: weight is not positive");
    }
    const double k = w / L;
    K.diag[e] += k;
    if (e + 1 < n) {
      K.diag[e + 1] += k;
      K.lower[e] -= k;
      K.upper[e] -= k;
    }
  }
  return K;
}

std::vector<double> flow_step(const StoredEnergy& model, const DensityProfile& profile,
                              const RadialField& field, FlowMetric metric) {
  const std::vector<double> load = weak_form_load(model, profile, field);
  const Tridiagonal K = flow_metric_matrix(model, field, metric);
  std::vector<double> rhs(load.begin(), load.end() - 1);
  for (double& x : rhs) x = -x;
  std::vector<double> z = solve_tridiagonal(K.lower, K.diag, K.upper, rhs);
  z.push_back(0.0);
  return z;
}

namespace {

bool admissible(const std::vector<double>& r) {
  if (!(r.front() > 0.0) || !std::isfinite(r.front())) return false;
  for (std::size_t i = 1; i < r.size(); ++i)
    if (!(r[i] > r[i - 1]) || !std::isfinite(r[i])) return false;
  return true;
}

}  // namespace

FlowState flow_minimize(const StoredEnergy& model, const DensityProfile& profile,
                        const FlowConfig& cfg) {
  if (cfg.grid.size() < 2) throw InvalidParameter("flow_minimize: grid needs two or more nodes");
  if (!(cfg.dt > 0.0) || !(cfg.max_dt >= cfg.dt) || !(cfg.min_dt > 0.0))
    throw InvalidParameter("flow_minimize: need 0 < min_dt, 0 < dt <= max_dt");
  if (!(cfg.stop_tol > 0.0)) throw InvalidParameter("flow_minimize: stop_tol must be positive");

  RadialField start = cfg.init ? *cfg.init : affine_map(cfg.lambda, cfg.grid);
  if (start.size() != cfg.grid.size() ||
      !std::equal(cfg.grid.begin(), cfg.grid.end(), start.nodes().begin()))
    start = start.resampled(cfg.grid);
  if (!(start.cavity() > 0.0))
    throw InvalidParameter("flow_minimize: initial field must have r(ε) > 0");

  FlowState st(RadialField(std::vector<double>(start.nodes().begin(), start.nodes().end()),
                           std::vector<double>(start.values().begin(), start.values().end())));
  st.dt = cfg.dt;
  double energy = total_energy(model, profile, st.field);
  st.energy_history.push_back(energy);
  if (cfg.record_trace) st.trace.push_back({0, 0.0, energy, 0.0});

  const std::vector<double> nodes(st.field.nodes().begin(), st.field.nodes().end());
  std::vector<double> r(st.field.values().begin(), st.field.values().end());
  std::vector<double> trial(r.size());
  int streak = 0;

  while (st.step_index < cfg.max_steps) {
    const std::vector<double> z = flow_step(model, profile, st.field, cfg.metric);
    double zmax = 0.0;
    for (double x : z) zmax = std::max(zmax, std::abs(x));
    if (zmax == 0.0) {
      ++st.step_index;
      st.last_step_norm = 0.0;
      st.energy_history.push_back(energy);
      if (cfg.record_trace) st.trace.push_back({st.step_index, st.t, energy, 0.0});
      st.stop = FlowStop::step_norm;
      st.converged = true;
      return st;
    }

    bool accepted = false;
    double new_energy = energy;
    while (st.dt >= cfg.min_dt) {
      for (std::size_t i = 0; i < r.size(); ++i) trial[i] = r[i] + st.dt * z[i];
      trial.back() = r.back();  // r(1) = λ exactly
      if (admissible(trial)) {
        new_energy = total_energy(model, profile, RadialField(nodes, trial));
        if (std::isfinite(new_energy) && new_energy <= energy + 1e-12 * std::abs(energy)) {
          accepted = true;
          break;
        }
      }
      st.dt *= 0.5;
      ++st.rejected;
      streak = 0;
    }
    if (!accepted) {
      st.stop = FlowStop::step_collapse;
      return st;
    }

    r.swap(trial);
    st.field = RadialField(nodes, r);
    ++st.step_index;
    st.t += st.dt;
    st.last_step_norm = st.dt * zmax;
    energy = new_energy;
    st.energy_history.push_back(energy);
    if (cfg.record_trace) st.trace.push_back({st.step_index, st.t, energy, st.last_step_norm});

    if (st.last_step_norm <= cfg.stop_tol) {
      st.stop = FlowStop::step_norm;
      st.converged = true;
      return st;
    }
    const auto& h = st.energy_history;
    if (cfg.stall_window > 0 && h.size() > cfg.stall_window &&
        h[h.size() - 1 - cfg.stall_window] - energy <= cfg.stall_tol * std::abs(energy)) {
      st.stop = FlowStop::stagnation;
      st.converged = true;
      return st;
    }
    if (++streak >= cfg.grow_after) {
      st.dt = std::min(2.0 * st.dt, cfg.max_dt);
      streak = 0;
    }
  }
  st.stop = FlowStop::budget;
  return st;
}

void write_flow_trace(const std::vector<FlowTraceRow>& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "step,t,energy,step_norm\n";
  for (const auto& row : trace)
    out << row.step << ',' << csv_row({row.t, row.energy, row.step_norm}) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace cavity
