// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "cavity/config.hpp"
#include "cavity/error.hpp"
#include "cavity/pipeline.hpp"

using namespace cavity;

namespace {

constexpr double kPi = std::numbers::pi;

struct Criterion {
  int id;
  std::string title;
  bool ok = true;
  std::vector<std::string> notes;

  void require(bool cond, const std::string& what) {
    if (!cond) ok = false;
    notes.push_back(std::string(cond ? "ok   " : "FAIL ") + what);
  }
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}
std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

SolveOutcome run(double lambda, double rho0, Method method = Method::hybrid, bool trace = false) {
  Config c;
  c.solver.lambda = lambda;
  c.density.rho0 = rho0;
  c.solver.method = method;
  auto req = SolveRequest::from_config(c);
  req.trace = trace;
  return solve(req);
}

double sup_identity_error(const RadialField& f) {
  double e = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) e = std::max(e, std::abs(f.values()[i] - f.nodes()[i]));
  return e;
}

bool descends(const std::vector<FlowTraceRow>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (trace[i].energy > trace[i - 1].energy + 1e-12 * std::abs(trace[i - 1].energy)) return false;
  return trace.size() >= 2;
}

}  // namespace

int main() {
  std::vector<Criterion> out;
  const auto model = Config{}.make_model();
  const auto rho1 = DensityProfile::constant(1.0);

  const SolveOutcome A = run(1.0, 1.0, Method::hybrid, true);
  const SolveOutcome B = run(1.15, 1.0, Method::hybrid, true);

  {
    Criterion c{1, "solve at lambda=1, rho0=1"};
    c.require(A.record.converged(), "status " + A.record.status);
    c.require(std::abs(A.record.energy - 0.49074) <= 5e-3, fmt("energy %.7f vs 0.49074 +- 5e-3", A.record.energy));
    c.require(A.record.cavity <= 5e-3, fmt("cavity %.6e <= 5e-3", A.record.cavity));
    c.require(A.elapsed_s <= 10.0, fmt("runtime %.3f s <= 10 s", A.elapsed_s));
    out.push_back(c);
  }
  {
    Criterion c{2, "solve at lambda=1.15, rho0=1"};
    c.require(B.record.converged(), "status " + B.record.status);
    c.require(std::abs(B.record.cavity - 0.48346) <= 5e-3, fmt("cavity %.6f vs 0.48346 +- 5e-3", B.record.cavity));
    c.require(std::abs(B.record.energy - 0.91034) <= 5e-3, fmt("energy %.6f vs 0.91034 +- 5e-3", B.record.energy));
    c.require(B.elapsed_s <= 10.0, fmt("runtime %.3f s <= 10 s", B.elapsed_s));
    out.push_back(c);
  }
  {
    Criterion c{3, "identity energy and minimality"};
    const double expect = 4.0 / 3.0 - 4.0 * kPi / 15.0;
    const double I = total_energy(*model, rho1, affine_map(1.0, uniform_grid(2001, 0.0)));
    c.require(std::abs(I - expect) <= 1e-9, fmt("I(identity) %.12f vs 4/3 - 4pi/15 = %.12f", I, expect));
    c.require(A.record.energy <= I, fmt("solve energy %.7f <= %.7f", A.record.energy, I));
    out.push_back(c);
  }
  {
    Criterion c{4, "gravity quadrature oracle at 2000^2 nodes"};
    Config cfg;
    cfg.solver.lambda = 1.15;
    const auto rep = oracle_check(cfg, QuadSpec{2000, 2000});
    c.require(rep.cases.size() == 3, "identity, incompressible and solved cases present");
    for (const auto& k : rep.cases)
      c.require(k.rel_error <= 1e-4, k.name + fmt(": rel error %.3e <= 1e-4", k.rel_error));
    if (!rep.cases.empty()) {
      const double v = rep.cases.front().brute;
      c.require(std::abs(v - 4.0 * kPi / 15.0) <= 1e-6, fmt("identity V/(4pi) %.10f vs 4pi/15, diff %.2e", v, std::abs(v - 4 * kPi / 15)));
    }
    out.push_back(c);
  }
  {
    Criterion c{5, "gravity off returns the identity"};
    for (Method m : {Method::shoot, Method::flow}) {
      const auto o = run(1.0, 0.0, m);
      const std::string tag = to_string(m);
      c.require(o.record.converged() && o.field.has_value(), tag + ": status " + o.record.status);
      if (o.field) c.require(sup_identity_error(*o.field) <= 1e-8, tag + fmt(": |r - R|_inf %.2e <= 1e-8", sup_identity_error(*o.field)));
      c.require(std::abs(o.record.nu - 1.0) <= 1e-8, tag + fmt(": nu %.12f = 1 +- 1e-8", o.record.nu));
    }
    out.push_back(c);
  }
  {
    Criterion c{6, "critical displacement"};
    Config cfg;
    std::vector<double> lc;
    for (double rho : {0.5, 1.0, 1.5}) {
      try {
        const auto r = find_critical_lambda(cfg, rho);
        lc.push_back(r.lambda_c);
        c.notes.push_back(fmt("     rho0 %.1f: lambda_c %.5f", rho, r.lambda_c));
      } catch (const Error& e) {
        c.require(false, fmt("rho0 %.1f: ", rho) + e.what());
        lc.push_back(std::nan(""));
      }
    }
    const double floor = std::pow(1.5, 1.0 / 12.0);
    c.require(lc[1] >= 1.0344 - 1e-3 && lc[1] <= 1.15, fmt("lambda_c(1) %.5f in [1.0334, 1.15]", lc[1]));
    c.require(lc[1] >= floor - cfg.critical.tol, fmt("lambda_c(1) >= d0^(1/3) - tol = %.5f", floor - cfg.critical.tol));
    c.require(lc[0] <= lc[1] && lc[1] <= lc[2], "lambda_c nondecreasing over rho0 = 0.5, 1.0, 1.5");
    out.push_back(c);
  }
  {
    Criterion c{7, "7x7 surface sweep"};
    Config cfg;
    cfg.sweep.lambda_count = 7;
    cfg.sweep.rho0_count = 7;
    cfg.sweep.threads = 1;
    const auto t0 = std::chrono::steady_clock::now();
    const auto table = sweep(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.require(secs <= 600.0, fmt("runtime %.1f s <= 600 s", secs));
    const auto& L = table.lambdas;
    const auto& P = table.rho0s;
    bool all_conv = true;
    for (const auto& r : table.records) all_conv = all_conv && r.converged();
    c.require(all_conv, "every point converged");

    double worst = 0.0;
    for (std::size_t i = 0; i < P.size(); ++i) worst = std::max(worst, table.at(i, 0).cavity);
    c.require(worst <= 1e-2, fmt("max cavity at lambda=%.2f is %.3e <= 1e-2", L[0], worst));

    // past onset: points with cavity above the critical threshold
    bool increasing = true, concave = true;
    int triples = 0;
    for (std::size_t i = 0; i < P.size(); ++i) {
      std::size_t j0 = L.size();
      for (std::size_t j = 0; j < L.size(); ++j)
        if (table.at(i, j).cavity >= cfg.critical.c_tol) {
          j0 = j;
          break;
        }
      for (std::size_t j = j0 + 1; j < L.size(); ++j)
        if (!(table.at(i, j).cavity > table.at(i, j - 1).cavity)) increasing = false;
      for (std::size_t j = j0 + 2; j < L.size(); ++j) {
        ++triples;
        const double d2 = table.at(i, j).cavity - 2 * table.at(i, j - 1).cavity + table.at(i, j - 2).cavity;
        if (d2 > 0.0) concave = false;
      }
    }
    c.require(increasing, "cavity increasing in lambda past onset in every row");
    c.require(concave, fmt("cavity discretely concave past onset (%g triples checked)", triples));

    int bad_cols = 0;
    for (std::size_t j = 0; j < L.size(); ++j)
      for (std::size_t i = 1; i < P.size(); ++i)
        if (!(table.at(i, j).energy > table.at(i - 1, j).energy)) {
          ++bad_cols;
          break;
        }
    c.require(bad_cols == 0, fmt("energy strictly increasing in rho0: %g of %g columns violate", bad_cols, double(L.size())));
    const std::size_t jm = L.size() / 2;
    c.notes.push_back(fmt("     column lambda=%.2f: energy(rho0=0.5) = %.5f", L[jm], table.at(0, jm).energy) +
                      fmt(", energy(rho0=1.5) = %.5f", table.at(P.size() - 1, jm).energy));
    out.push_back(c);
  }
  {
    Criterion c{8, "flow predictor vs shooting corrector"};
    for (const auto* o : {&A, &B}) {
      const std::string tag = fmt("lambda=%.2f", o->record.lambda);
      c.require(o->sup_distance && *o->sup_distance <= 1e-2, tag + fmt(": sup distance %.3e <= 1e-2", o->sup_distance.value_or(NAN)));
      c.require(o->field && o->field->size() == 2001, tag + ": 2001-node field");
      c.require(o->el_residual && *o->el_residual <= 1e-3, tag + fmt(": weak-form residual %.3e <= 1e-3", o->el_residual.value_or(NAN)));
    }
    out.push_back(c);
  }
  {
    Criterion c{9, "property suites"};
    const auto d = check_derivatives(*model, 100, 1e-5, 2024);
    c.require(d.passed, fmt("derivatives vs finite differences, 100 states, max rel deviation %.2e", d.value));

    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(0.2, 5.0);
    double perm_err = 0.0;
    for (int k = 0; k < 100; ++k) {
      double v[3] = {u(rng), u(rng), u(rng)};
      const double ref = model->density(0.5, {v[0], v[1], v[2]});
      std::sort(v, v + 3);
      do {
        perm_err = std::max(perm_err, std::abs(model->density(0.5, {v[0], v[1], v[2]}) - ref) / std::abs(ref));
      } while (std::next_permutation(v, v + 3));
    }
    c.require(perm_err <= 1e-14, fmt("permutation invariance, max rel diff %.2e", perm_err));

    const auto sf = check_stress_free(*model, 1e-12);
    c.require(sf.passed, fmt("stress-free reference, |phi_1(I)| = %.2e", std::abs(sf.value)));
    const auto be = check_baker_ericksen(*model, 100, 7);
    c.require(be.passed, fmt("Baker-Ericksen sample positivity, min product %.3e", be.value));

    std::vector<RadialField> fields;
    for (double l : {1.05, 1.10, 1.15}) {
      auto res = solve_shooting(*model, rho1, l, 1e-3);
      if (res.field) fields.push_back(*res.field);
    }
    bool ordered = fields.size() == 3;
    for (std::size_t k = 1; ordered && k < fields.size(); ++k)
      for (std::size_t i = 0; i < fields[k].size(); ++i)
        if (fields[k].values()[i] < fields[k - 1].values()[i]) ordered = false;
    c.require(ordered, "solved fields ordered in lambda = 1.05, 1.10, 1.15");

    std::size_t checked = 0, violations = 0;
    if (B.field) {
      const auto& f = *B.field;
      for (std::size_t i = 1; i + 1 < f.size(); ++i) {
        const double R0 = f.nodes()[i], R1 = f.nodes()[i + 1];
        const auto s = f.strain(0.5 * (R0 + R1));
        if (!(s.v1 < s.v2)) continue;
        ++checked;
        if (cauchy_stress(*model, f, R1) < cauchy_stress(*model, f, R0)) ++violations;
      }
    }
    c.require(checked > 0 && violations == 0,
              fmt("radial Cauchy stress nondecreasing where v1 < v2: %g violations in %g intervals", double(violations), double(checked)));

    c.require(descends(A.trace) && descends(B.trace), "every accepted flow step decreases the energy");
    out.push_back(c);
  }

  int failed = 0;
  for (const auto& c : out) {
    std::printf("[%s] criterion %d: %s\n", c.ok ? "PASS" : "FAIL", c.id, c.title.c_str());
    for (const auto& n : c.notes) std::printf("       %s\n", n.c_str());
    failed += c.ok ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(out.size()) - failed, out.size());
  return failed == 0 ? 0 : 1;
}
