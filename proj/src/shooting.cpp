#include "cavity/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cavity/error.hpp"

namespace cavity {

namespace {

// r'' or nullopt when the state is outside the equation's domain.
std::optional<double> el_rhs_or_none(const StoredEnergy& model, const DensityProfile& profile,
                                     double R, double r, double rp) {
  if (!(r > 0.0) || !(rp > 0.0) || !(R > 0.0) || !std::isfinite(r) || !std::isfinite(rp))
    return std::nullopt;
  const double v2 = r / R;
  const EnergyPartials d = model.partials(R, {rp, v2, v2});
  if (!(d.phi11 > 0.0) || !std::isfinite(d.phi11)) return std::nullopt;
  const double grav = profile.is_zero() ? 0.0 : profile(R) * profile.mass_within(R) / (r * r);
  const double num = 2.0 * (d.phi2 - d.phi1) / R + grav - d.phi1R -
                     2.0 * d.phi12 * (rp - v2) / R;
  const double out = num / d.phi11;
  if (!std::isfinite(out)) return std::nullopt;
  return out;
}

double residual_scale_at(const StoredEnergy& model, double R, double r, double rp) {
  const double v2 = r / R;
  return std::abs(model.partials(R, {rp, v2, v2}).phi2);
}

}  // namespace

double el_rhs(const StoredEnergy& model, const DensityProfile& profile, double R, double r,
              double rp) {
  if (!(R > 0.0) || !(r > 0.0) || !(rp > 0.0))
    throw DomainError("el_rhs: R, r and r' must be positive");
  const double v2 = r / R;
  const EnergyPartials d = model.partials(R, {rp, v2, v2});
  if (!(d.phi11 > 0.0))
    throw DegeneracyError("el_rhs: Φ,11 is not positive at the state");
  const double grav = profile.is_zero() ? 0.0 : profile(R) * profile.mass_within(R) / (r * r);
  return (2.0 * (d.phi2 - d.phi1) / R + grav - d.phi1R - 2.0 * d.phi12 * (rp - v2) / R) /
         d.phi11;
}

void IvpSpec::validate() const {
  if (!model || !profile) throw InvalidParameter("IvpSpec: model and profile are required");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidParameter("IvpSpec: need 0 < epsilon < 1");
  if (!(lambda > 0.0)) throw InvalidParameter("IvpSpec: lambda must be positive");
  if (!(nu > 0.0)) throw InvalidParameter("IvpSpec: nu must be positive");
  if (!(rtol > 0.0) || !(atol > 0.0)) throw InvalidParameter("IvpSpec: tolerances must be positive");
  if (max_steps == 0) throw InvalidParameter("IvpSpec: max_steps must be positive");
}

const char* to_string(IvpEvent e) {
  switch (e) {
    case IvpEvent::none: return "none";
    case IvpEvent::slope_zero: return "slope_zero";
    case IvpEvent::collapse: return "collapse";
    case IvpEvent::underflow: return "underflow";
    case IvpEvent::step_budget: return "step_budget";
  }
  return "unknown";
}

const char* to_string(ShootingStatus s) {
  switch (s) {
    case ShootingStatus::converged: return "converged";
    case ShootingStatus::ode_failure: return "ode_failure";
    case ShootingStatus::bracket_failure: return "bracket_failure";
    case ShootingStatus::max_iterations: return "max_iterations";
  }
  return "unknown";
}

std::pair<double, double> Trajectory::sample(double R) const {
  const double lo = std::min(end_radius, 1.0);
  if (R < lo - 1e-14 || R > 1.0 + 1e-14)
    throw DomainError("Trajectory::sample: radius outside the integrated span");
  auto y = solution.eval(std::clamp(R, lo, 1.0));
  return {y[0], y[1]};
}

RadialField Trajectory::to_field(std::span<const double> grid) const {
  std::vector<double> nodes(grid.begin(), grid.end()), r(grid.size()), rp(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto [a, b] = sample(grid[i]);
    r[i] = a;
    rp[i] = b;
  }
  // pin the end points to the integrated values
  if (!nodes.empty() && std::abs(nodes.front() - end_radius) < 1e-14) {
    r.front() = r_end;
    rp.front() = rp_end;
  }
  if (!solution.steps.empty() && nodes.back() == 1.0) r.back() = solution.steps.front().rcont[0][0];
  return RadialField(std::move(nodes), std::move(r), std::move(rp));
}

Trajectory integrate_ivp(const IvpSpec& spec) {
  spec.validate();
  const StoredEnergy& model = *spec.model;
  const DensityProfile& profile = *spec.profile;
  auto rhs = [&](double R, const ode::State<2>& y, ode::State<2>& dy) {
    auto acc = el_rhs_or_none(model, profile, R, y[0], y[1]);
    if (!acc) return false;
    dy[0] = y[1];
    dy[1] = *acc;
    return true;
  };
  ode::Options opt;
  opt.rtol = spec.rtol;
  opt.atol = spec.atol;
  opt.max_steps = spec.max_steps;

  Trajectory out;
  out.solution = ode::integrate_dopri5<2>(rhs, 1.0, {spec.lambda, spec.nu}, spec.epsilon, opt);
  const auto& sol = out.solution;
  out.end_radius = sol.t_end;
  out.r_end = sol.y_end[0];
  out.rp_end = sol.y_end[1];
  switch (sol.status) {
    case ode::Status::reached_end:
      out.event = IvpEvent::none;
      break;
    case ode::Status::step_budget:
      out.event = IvpEvent::step_budget;
      break;
    case ode::Status::step_underflow:
      if (sol.failed_state && !((*sol.failed_state)[1] > 0.0)) {
        out.event = IvpEvent::slope_zero;
      } else if (sol.failed_state && !((*sol.failed_state)[0] > 0.0)) {
        out.event = IvpEvent::collapse;
      } else {
        // r' blowing up while r shrinks is the collapse mode; a stall with
        // the radial stretch below the hoop stretch is over-compression.
        const double v2 = out.r_end / out.end_radius;
        out.event = out.rp_end > v2 ? IvpEvent::collapse : IvpEvent::slope_zero;
      }
      break;
  }
  return out;
}

double phi_scale(const StoredEnergy& model, double lambda) {
  const EnergyPartials d = model.partials(1.0, {lambda, lambda, lambda});
  return 1.0 + std::abs(d.phi1) + std::abs(d.phi2);
}

ResidualValue shoot_residual(const IvpSpec& spec) {
  ResidualValue out;
  out.trajectory = integrate_ivp(spec);
  const Trajectory& t = out.trajectory;
  if (t.reached()) {
    const double v2 = t.r_end / spec.epsilon;
    out.g = spec.model->partials(spec.epsilon, {t.rp_end, v2, v2}).phi1;
    return out;
  }
  out.penalty = true;
  const double mag = phi_scale(*spec.model, spec.lambda) * (1.0 + (t.end_radius - spec.epsilon));
  out.g = t.event == IvpEvent::slope_zero ? -mag : mag;
  return out;
}

ShootingResult solve_shooting(const StoredEnergy& model, const DensityProfile& profile,
                              double lambda, double epsilon, const ShootingOptions& opt) {
  IvpSpec spec;
  spec.model = &model;
  spec.profile = &profile;
  spec.lambda = lambda;
  spec.epsilon = epsilon;
  spec.rtol = opt.rtol;
  spec.atol = opt.atol;
  spec.max_steps = opt.max_steps;
  spec.nu = lambda;
  spec.validate();

  ShootingResult res;
  int budget_failures = 0;
  auto g = [&](double nu) {
    spec.nu = nu;
    ResidualValue v = shoot_residual(spec);
    ++res.evaluations;
    if (v.trajectory.event == IvpEvent::step_budget) ++budget_failures;
    return v.g;
  };

  // Bracket: explicit, else expand symmetrically around the predictor.
  double a = 0.0, b = 0.0, fa = 0.0, fb = 0.0;
  bool bracketed = false;
  if (opt.bracket) {
    a = opt.bracket->first;
    b = opt.bracket->second;
    if (!(a > 0.0) || !(b > 0.0)) throw InvalidParameter("solve_shooting: bracket must be positive");
    fa = g(a);
    fb = g(b);
    bracketed = (fa > 0.0) != (fb > 0.0) || fa == 0.0 || fb == 0.0;
  }
  if (!bracketed) {
    const double centre = opt.predictor.value_or(opt.bracket ? 0.5 * (a + b) : lambda);
    if (!(centre > 0.0)) throw InvalidParameter("solve_shooting: predictor must be positive");
    double fc = g(centre);
    double step = 1e-3 * centre;
    for (int k = 0; k < opt.max_expansions && !bracketed; ++k, step *= 2.0) {
      for (double trial : {centre + step, centre - step}) {
        if (!(trial > 0.0)) continue;
        double ft = g(trial);
        if ((ft > 0.0) != (fc > 0.0) || ft == 0.0) {
          a = std::min(centre, trial);
          b = std::max(centre, trial);
          fa = trial < centre ? ft : fc;
          fb = trial < centre ? fc : ft;
          bracketed = true;
          break;
        }
      }
    }
  }
  if (!bracketed) {
    res.status = budget_failures > 0 ? ShootingStatus::ode_failure : ShootingStatus::bracket_failure;
    res.message = "no sign change of the inner residual found";
    return res;
  }

  RootResult root = find_root(g, a, b, fa, fb, opt.nu_tol, opt.residual_tol, opt.max_iterations);
  res.iterations = root.iterations;
  res.bracket = {root.lo, root.hi};

  // Keep the endpoint whose integration reached ε and has the smaller |g|.
  std::optional<ResidualValue> best;
  double best_nu = 0.0;
  for (double nu : {root.x, root.lo, root.hi}) {
    spec.nu = nu;
    ResidualValue v = shoot_residual(spec);
    if (v.penalty) continue;
    if (!best || std::abs(v.g) < std::abs(best->g)) {
      best = std::move(v);
      best_nu = nu;
    }
  }
  if (!best) {
    res.status = budget_failures > 0 ? ShootingStatus::ode_failure : ShootingStatus::bracket_failure;
    res.nu_star = root.x;
    res.message = "no endpoint of the final bracket reaches the inner radius";
    return res;
  }

  const Trajectory& t = best->trajectory;
  res.nu_star = best_nu;
  res.residual = best->g;
  res.residual_scale = 1.0 + residual_scale_at(model, epsilon, t.r_end, t.rp_end);
  res.field = t.to_field(canonical_grid(opt.grid_nodes, epsilon, opt.grid_ratio));

  const double width = root.hi - root.lo;
  const bool machine_width =
      width <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(root.x));
  const bool tight = std::abs(res.residual) <= opt.residual_tol * res.residual_scale &&
                     width <= opt.nu_tol;
  const bool resolved =
      machine_width && std::abs(res.residual) <= opt.resolution_residual_tol * res.residual_scale;
  if (tight || resolved) {
    res.status = ShootingStatus::converged;
  } else if (root.iterations >= opt.max_iterations) {
    res.status = ShootingStatus::max_iterations;
    res.message = "iteration budget exhausted";
  } else {
    res.status = ShootingStatus::bracket_failure;
    res.message = "bracket collapsed onto a jump of the residual";
  }
  return res;
}

double traction_free_slope(const StoredEnergy& model, double lambda) {
  if (!(lambda > 0.0)) throw InvalidParameter("traction_free_slope: lambda must be positive");
  auto f = [&](double nu) { return model.partials(1.0, {nu, lambda, lambda}).phi1; };
  double lo = lambda, hi = lambda, flo = f(lo), fhi = flo;
  if (flo == 0.0) return lambda;
  // Φ,1 increases with v1 for convex models
  for (int k = 0; k < 200 && (flo > 0.0) == (fhi > 0.0); ++k) {
    if (flo > 0.0) {
      hi = lo;
      fhi = flo;
      lo *= 0.5;
      flo = f(lo);
    } else {
      lo = hi;
      flo = fhi;
      hi *= 2.0;
      fhi = f(hi);
    }
  }
  if ((flo > 0.0) == (fhi > 0.0))
    throw SolverError("traction_free_slope: no traction-free slope found");
  return find_root(f, lo, hi, flo, fhi, 1e-15, 0.0, 200).x;
}

FreeBoundaryResult solve_free_boundary(const StoredEnergy& model, const DensityProfile& profile,
                                       double epsilon, const ShootingOptions& opt,
                                       double centre_tol) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw InvalidParameter("solve_free_boundary: need 0 < epsilon < 1");
  IvpSpec spec;
  spec.model = &model;
  spec.profile = &profile;
  spec.epsilon = epsilon;
  spec.rtol = opt.rtol;
  spec.atol = opt.atol;
  spec.max_steps = opt.max_steps;

  struct Eval {
    double lambda, nu, defect;
    Trajectory traj;
  };
  auto evaluate = [&](double lambda) {
    spec.lambda = lambda;
    spec.nu = traction_free_slope(model, lambda);
    Trajectory t = integrate_ivp(spec);
    double defect;
    if (t.reached()) {
      defect = t.r_end - epsilon * t.rp_end;
    } else {
      // collapse undershoots the centre, a stalled slope overshoots it
      double mag = 1.0 + (t.end_radius - epsilon);
      defect = t.event == IvpEvent::slope_zero ? mag : -mag;
    }
    return Eval{lambda, spec.nu, defect, std::move(t)};
  };

  FreeBoundaryResult res;
  Eval lo = evaluate(1.0), hi = lo;
  double step = 0.01;
  bool bracketed = lo.defect == 0.0;
  for (int k = 0; k < 40 && !bracketed; ++k, step *= 2.0) {
    for (double trial : {1.0 + step, 1.0 - step}) {
      if (!(trial > 0.0)) continue;
      Eval e = evaluate(trial);
      if ((e.defect > 0.0) != (hi.defect > 0.0)) {
        lo = std::move(e);
        bracketed = true;
        break;
      }
    }
  }
  if (!bracketed) {
    res.status = ShootingStatus::bracket_failure;
    res.message = "no sign change of the centre defect found";
    return res;
  }
  auto f = [&](double lambda) { return evaluate(lambda).defect; };
  RootResult root = find_root(f, lo.lambda, hi.lambda, lo.defect, hi.defect, 1e-12, 0.0,
                              opt.max_iterations);
  res.iterations = root.iterations;

  std::optional<Eval> best;
  for (double lam : {root.x, root.lo, root.hi}) {
    Eval e = evaluate(lam);
    if (!e.traj.reached()) continue;
    if (!best || std::abs(e.defect) < std::abs(best->defect)) best = std::move(e);
  }
  if (!best) {
    res.status = ShootingStatus::ode_failure;
    res.message = "no endpoint of the final bracket reaches the inner radius";
    return res;
  }
  res.lambda = best->lambda;
  res.nu = best->nu;
  res.defect = best->defect;
  res.field = best->traj.to_field(canonical_grid(opt.grid_nodes, epsilon, opt.grid_ratio));
  const double rp = best->traj.rp_end;
  const bool intact = best->traj.r_end <= epsilon * rp * (1.0 + centre_tol);
  const bool small = std::abs(res.defect) <= centre_tol * epsilon * rp;
  const double width = root.hi - root.lo;
  if (intact && (small || width <= 1e-10)) {
    res.status = ShootingStatus::converged;
  } else {
    res.status = root.iterations >= opt.max_iterations ? ShootingStatus::max_iterations
                                                        : ShootingStatus::bracket_failure;
    res.message = "centre defect not resolved";
  }
  return res;
}

}  // namespace cavity
