#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cavity/energy_model.hpp"

namespace cavity {

class DensityProfile;

// Strains of a radial map at one reference radius.
struct StrainSample {
  double R = 0.0;
  double v1 = 1.0;   // r'(R)
  double v2 = 1.0;   // r(R)/R
  double det = 1.0;  // v1 v2²
};

// Piecewise-linear radial deformation r(R) on nodes R_0 < ... < R_N = 1.
// Optionally carries nodal slopes (from an ODE solution); energies always
// use the piecewise-linear interpolant.
class RadialField {
 public:
  RadialField(std::vector<double> nodes, std::vector<double> values,
              std::optional<std::vector<double>> slopes = std::nullopt);

  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> values() const { return values_; }
  const std::optional<std::vector<double>>& slopes() const { return slopes_; }
  std::size_t size() const { return nodes_.size(); }

  double inner_radius() const { return nodes_.front(); }  // ε
  double cavity() const { return values_.front(); }       // r(ε)
  double lambda() const { return values_.back(); }        // r(1)

  double value(double R) const;
  // Nodal slope when available, else the slope of the containing interval
  // (the right-hand interval at interior nodes).
  double slope(double R) const;
  double interval_slope(std::size_t i) const;
  StrainSample strain(double R) const;

  // Fields with identical nodes: sup |r_a - r_b|.
  double sup_distance(const RadialField& other) const;
  // Evaluate at arbitrary radii by linear interpolation.
  RadialField resampled(std::span<const double> grid) const;

 private:
  std::size_t interval(double R) const;

  std::vector<double> nodes_, values_;
  std::optional<std::vector<double>> slopes_;
};

// Geometric grid on [ε, 1] whose first interval is `ratio` times the last.
std::vector<double> canonical_grid(std::size_t nodes, double epsilon, double ratio = 1e-3);
std::vector<double> uniform_grid(std::size_t nodes, double start = 0.0);

RadialField affine_map(double lambda, std::span<const double> grid);
// r(R) = (R³ + λ³ - 1)^(1/3), λ >= 1
RadialField incompressible_map(double lambda, std::span<const double> grid);

// I_mec = ∫ Φ(R, r', r/R, r/R) R² dR by two-point Gauss per interval.
double mechanical_energy(const StoredEnergy& model, const RadialField& field);
// I = I_mec - I_pot (the 4π factor dropped)
double total_energy(const StoredEnergy& model, const DensityProfile& profile,
                    const RadialField& field);

// Radial Cauchy stress T = (R²/r²) Φ,1(R, r', r/R, r/R).
double cauchy_stress(const StoredEnergy& model, const RadialField& field, double R);

// Discrete weak-form load of the Euler-Lagrange equation against every hat
// function with v(1) = 0:
//   b_j = ∫ [R² Φ,1 φ_j' + (2R Φ,2 + R² ρ0 M_R / r²) φ_j] dR.
// This is the gradient of the discrete total energy with respect to the
// free nodal values; the last entry (fixed node) is zero.
std::vector<double> weak_form_load(const StoredEnergy& model, const DensityProfile& profile,
                                   const RadialField& field);
double el_residual(const StoredEnergy& model, const DensityProfile& profile,
                   const RadialField& field);

// CSV "R,r,dr,v2,T,det" at 17 significant digits; T, v2 and det are NaN
// at R = 0.
void write_field_csv(const StoredEnergy& model, const RadialField& field,
                     const std::filesystem::path& path);
std::string field_csv(const StoredEnergy& model, const RadialField& field);
// Reads R, r, dr back; dr becomes the nodal slopes.
RadialField read_field_csv(const std::filesystem::path& path);
RadialField parse_field_csv(const std::string& text);

}  // namespace cavity
