#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "cavity/numerics.hpp"

namespace cavity {

class RadialField;

// Reference mass density ρ0(R) on [0, 1] together with the cumulative mass
// M_R = 4π ∫_0^R ρ0(u) u² du. A constant density keeps M_R in closed form;
// a tabulated density precomputes M_R on a 4096-node uniform grid.
class DensityProfile {
 public:
  static DensityProfile constant(double rho0);
  // Samples (R_i, ρ_i) with strictly increasing R covering [0, 1].
  static DensityProfile tabulated(std::vector<double> radii, std::vector<double> rho);
  // Two-column CSV "R,rho0"; a non-numeric first line is taken as a header.
  static DensityProfile from_csv(const std::filesystem::path& path);

  double operator()(double R) const;
  double mass_within(double R) const;
  double k0() const { return k0_; }
  double k1() const { return k1_; }
  // ρ0 ≡ 0: gravity switched off.
  bool is_zero() const { return k1_ == 0.0; }
  bool is_constant() const { return !table_.has_value(); }

  static constexpr std::size_t kMassGridNodes = 4096;

 private:
  DensityProfile() = default;

  double constant_ = 0.0;
  double k0_ = 0.0, k1_ = 0.0;
  std::optional<MonotoneCubic> table_;
  std::optional<MonotoneCubic> mass_;
};

// I_pot(r) = ∫ ρ0(R) M_R / r(R) R² dR over the field's domain, composite
// two-point Gauss on the field's intervals.
double potential_energy(const DensityProfile& profile, const RadialField& field);

struct QuadSpec {
  std::size_t outer_nodes = 2000;
  std::size_t inner_nodes = 2000;
};

// Brute-force self-energy V(r) from the double integral over the ball
// with only the angular integral done in closed form:
//   2V = 4π ∫ρ0(R)R² [2π ∫ ρ0(U)U²/(r(R)r(U)) (r(R)+r(U)-|r(R)-r(U)|) dU] dR.
// The inner integral is split at U = R where |r(R) - r(U)| has its kink.
// V / (4π) must agree with potential_energy.
double brute_force_potential(const DensityProfile& profile, const RadialField& field,
                             const QuadSpec& quad = {});

}  // namespace cavity
