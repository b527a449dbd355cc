#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cavity/energy_model.hpp"
#include "cavity/gravity.hpp"
#include "cavity/ode.hpp"
#include "cavity/radial_field.hpp"

namespace cavity {

// r'' from the radial Euler-Lagrange equation
//   d/dR[R² Φ,1] = 2R Φ,2 + R² ρ0 M_R / r².
// Throws DomainError for a non-positive state, DegeneracyError if Φ,11 <= 0.
double el_rhs(const StoredEnergy& model, const DensityProfile& profile, double R,
              double r, double rp);

// Backward initial-value problem r(1) = λ, r'(1) = ν integrated to R = ε.
struct IvpSpec {
  const StoredEnergy* model = nullptr;
  const DensityProfile* profile = nullptr;
  double lambda = 1.0;
  double nu = 1.0;
  double epsilon = 1e-3;
  double rtol = 1e-10;
  double atol = 1e-12;
  std::size_t max_steps = 200000;

  void validate() const;  // throws InvalidParameter
};

enum class IvpEvent {
  none,          // reached ε
  slope_zero,    // r' -> 0 before ε (over-compressed)
  collapse,      // r -> 0 or blow-up of r' before ε
  underflow,     // step size underflow without a classifiable cause
  step_budget,
};
const char* to_string(IvpEvent e);

struct Trajectory {
  IvpEvent event = IvpEvent::none;
  double end_radius = 1.0;  // ε when the integration completed
  double r_end = 0.0;
  double rp_end = 0.0;
  ode::Solution<2> solution;

  bool reached() const { return event == IvpEvent::none; }
  // (r, r') at R inside the integrated span.
  std::pair<double, double> sample(double R) const;
  // Samples the dense output on `grid`, which must lie inside the span.
  RadialField to_field(std::span<const double> grid) const;
};

Trajectory integrate_ivp(const IvpSpec& spec);

// Natural boundary value g(ν) = Φ,1(ε, r'(ε), r(ε)/ε, r(ε)/ε), positive when
// the inner radial stress is tensile. An integration that stops early is
// mapped to ∓scale·(1 + (R_ev - ε)): negative for r' -> 0, positive for
// collapse. `scale` is phi_scale(model, λ).
struct ResidualValue {
  double g = 0.0;
  bool penalty = false;
  Trajectory trajectory;
};
ResidualValue shoot_residual(const IvpSpec& spec);
double phi_scale(const StoredEnergy& model, double lambda);

enum class ShootingStatus { converged, ode_failure, bracket_failure, max_iterations };
const char* to_string(ShootingStatus s);

struct ShootingOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  std::size_t max_steps = 200000;
  double residual_tol = 1e-8;  // relative to 1 + |Φ,2| at ε
  double nu_tol = 1e-10;
  // Accepted when the bracket has collapsed to machine resolution around a
  // near-discontinuous root and |g| is still above residual_tol.
  double resolution_residual_tol = 1e-4;
  int max_iterations = 200;
  int max_expansions = 60;
  std::size_t grid_nodes = 2001;
  double grid_ratio = 1e-3;
  std::optional<std::pair<double, double>> bracket;
  std::optional<double> predictor;  // expansion centre when no bracket is given
};

struct ShootingResult {
  double nu_star = 0.0;
  std::optional<RadialField> field;  // on the canonical grid
  double residual = 0.0;
  double residual_scale = 1.0;
  int iterations = 0;
  int evaluations = 0;
  ShootingStatus status = ShootingStatus::bracket_failure;
  std::pair<double, double> bracket{0.0, 0.0};
  std::string message;

  bool converged() const { return status == ShootingStatus::converged; }
};

ShootingResult solve_shooting(const StoredEnergy& model, const DensityProfile& profile,
                              double lambda, double epsilon,
                              const ShootingOptions& opt = {});

// Outer slope ν with Φ,1(1, ν, λ, λ) = 0 (traction-free boundary).
double traction_free_slope(const StoredEnergy& model, double lambda);

struct FreeBoundaryResult {
  double lambda = 1.0;
  double nu = 1.0;
  std::optional<RadialField> field;
  double defect = 0.0;  // r(ε) - ε r'(ε)
  int iterations = 0;
  ShootingStatus status = ShootingStatus::bracket_failure;
  std::string message;

  bool converged() const { return status == ShootingStatus::converged; }
};

// Traction-free outer surface and intact centre: λ is adjusted until
// r(ε) <= ε r'(ε) (1 + centre_tol) with ν = traction_free_slope(λ).
FreeBoundaryResult solve_free_boundary(const StoredEnergy& model,
                                       const DensityProfile& profile, double epsilon,
                                       const ShootingOptions& opt = {},
                                       double centre_tol = 1e-3);

}  // namespace cavity
