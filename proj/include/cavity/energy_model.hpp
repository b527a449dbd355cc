#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cavity/numerics.hpp"

namespace cavity {

// Principal stretches at a material point. For radial fields v2 == v3.
struct StretchState {
  double v1 = 1.0;
  double v2 = 1.0;
  double v3 = 1.0;

  double det() const { return v1 * v2 * v3; }
  bool valid() const { return v1 > 0.0 && v2 > 0.0 && v3 > 0.0; }
};

// First and second partials of Φ(R, v1, v2, v3) in the combinations the
// radial Euler-Lagrange equation needs. phi12 is ∂²Φ/∂v1∂v2, which equals
// ∂²Φ/∂v1∂v3 at radial states.
struct EnergyPartials {
  double phi1 = 0.0;
  double phi2 = 0.0;
  double phi11 = 0.0;
  double phi12 = 0.0;
  double phi1R = 0.0;
};

// h(d) = C d^γ + D d^(-δ)
class VolumetricTerm {
 public:
  VolumetricTerm(double C, double D, double gamma_exp, double delta_exp);

  double value(double d) const;
  double d1(double d) const;
  double d2(double d) const;

  double C() const { return C_; }
  double D() const { return D_; }
  double gamma_exp() const { return gamma_.exponent(); }
  double delta_exp() const { return -delta_.exponent(); }

 private:
  double C_, D_;
  Power gamma_, gamma_m1_, gamma_m2_;
  Power delta_, delta_p1_, delta_p2_;
};

// D making the reference configuration stress free: (κ + Cγ)/δ.
double stress_free_D(double kappa, double C, double gamma_exp, double delta_exp);

// Minimizer of h: d0 = (Dδ / (Cγ))^(1/(γ+δ)). Requires C > 0 and D > 0.
double h_min_argument(const VolumetricTerm& vol);

// (coef / exponent) v^exponent; coef == 0 gives the zero function.
class PowerTerm {
 public:
  PowerTerm() : PowerTerm(0.0, 2.0) {}
  PowerTerm(double coef, double exponent);

  double value(double v) const;
  double d1(double v) const;
  double d2(double v) const;
  double coef() const { return coef_; }
  double exponent() const { return pow_.exponent(); }
  bool is_zero() const { return coef_ == 0.0; }

 private:
  double coef_;
  Power pow_, pow_m1_, pow_m2_;
};

// Weight function of R: either a constant or uniform-grid samples on [0, 1]
// with monotone cubic interpolation. Derivative samples are optional; when
// absent the interpolant is differentiated.
class WeightFunction {
 public:
  WeightFunction(double constant = 1.0);
  WeightFunction(std::vector<double> samples,
                 std::optional<std::vector<double>> derivative_samples = {});

  double operator()(double R) const;
  double derivative(double R) const;
  bool is_constant() const { return !table_.has_value(); }
  double min_value() const;
  double max_value() const;

 private:
  double constant_ = 1.0;
  std::optional<MonotoneCubic> table_;
  std::optional<MonotoneCubic> derivative_;
};

// Isotropic stored-energy density Φ(R, v1, v2, v3).
class StoredEnergy {
 public:
  virtual ~StoredEnergy() = default;

  virtual double density(double R, const StretchState& s) const = 0;
  virtual EnergyPartials partials(double R, const StretchState& s) const = 0;

  // Homogeneous comparison energy Φ̃ (same as density for homogeneous models).
  virtual double comparison_density(const StretchState& s) const = 0;
  // Lower-bound single-stretch function φ appearing in the growth condition
  // Φ >= Σφ(v_i) + h(v1 v2 v3).
  virtual double growth_phi(double v) const = 0;
  virtual double growth_h(double d) const = 0;
  virtual const VolumetricTerm& volumetric() const = 0;

  // d0^(1/3) when the material has the β ≡ 0, γ ≡ 1, α' <= 0, φ' >= 0
  // form for which λ³ < d0 rules out cavitation; empty otherwise.
  virtual std::optional<double> no_cavitation_floor() const = 0;
  virtual std::string name() const = 0;
};

// Φ̃(v) = (κ/p)(v1^p + v2^p + v3^p) + h(v1 v2 v3)
class PowerLawModel final : public StoredEnergy {
 public:
  PowerLawModel(double p, double kappa, VolumetricTerm vol);

  // The reference parameters p=2, κ=1, C=1, γ=δ=2 with stress-free D.
  static PowerLawModel reference();

  double density(double R, const StretchState& s) const override;
  EnergyPartials partials(double R, const StretchState& s) const override;
  double comparison_density(const StretchState& s) const override {
    return density(0.0, s);
  }
  double growth_phi(double v) const override;
  double growth_h(double d) const override { return vol_.value(d); }
  const VolumetricTerm& volumetric() const override { return vol_; }
  std::optional<double> no_cavitation_floor() const override;
  std::string name() const override { return "power_law"; }

  double p() const { return pow_p_.exponent(); }
  double kappa() const { return kappa_; }

 private:
  double kappa_;
  Power pow_p_, pow_pm1_, pow_pm2_;
  VolumetricTerm vol_;
};

// Φ(R, v) = α(R) Σφ(v_i) + β(R) Σ_{i<j} ψ(v_i v_j) + γ(R) h(v1 v2 v3)
class InhomogeneousModel final : public StoredEnergy {
 public:
  InhomogeneousModel(WeightFunction alpha, WeightFunction beta,
                     WeightFunction gamma_w, PowerTerm phi, PowerTerm psi,
                     VolumetricTerm vol);

  double density(double R, const StretchState& s) const override;
  EnergyPartials partials(double R, const StretchState& s) const override;
  double comparison_density(const StretchState& s) const override;
  double growth_phi(double v) const override;
  double growth_h(double d) const override;
  const VolumetricTerm& volumetric() const override { return vol_; }
  std::optional<double> no_cavitation_floor() const override;
  std::string name() const override { return "inhomogeneous"; }

 private:
  WeightFunction alpha_, beta_, gamma_w_;
  PowerTerm phi_, psi_;
  VolumetricTerm vol_;
};

// ---------------------------------------------------------------------------
// Validators. These are advisory: a failed hypothesis does not stop a solve.

struct ProbeSpec {
  double v_fit_lo = 10.0;    // φ growth fit range
  double v_fit_hi = 1.0e4;
  double d_small = 1.0e-8;   // h probe range
  double d_large = 1.0e6;
  double eta = 1.5;          // lower limit of the H4 integral (> 1)
  double v_max = 1.0e6;      // largest H4 cutoff
  double sample_lo = 0.2;    // random stretch samples for the ratio probe
  double sample_hi = 5.0;
  int samples = 100;
  unsigned seed = 12345;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;  // fitted exponent, bound, increment... per check
  std::string detail;
};

struct GrowthReport {
  std::vector<CheckResult> checks;
  // max |∂Φ/∂v_k(α∘v) v_k| / (Φ(v) + 1) over samples with |α_i - 1| < 0.1;
  // reported only, there is no constructive threshold for it.
  double derivative_ratio = 0.0;

  const CheckResult* find(const std::string& name) const;
  bool all_passed() const;
};

GrowthReport validate_growth(const StoredEnergy& model,
                             const ProbeSpec& probe = {});

// Analytic partials vs central differences of density on random samples.
CheckResult check_derivatives(const StoredEnergy& model, int samples,
                              double rel_tol, unsigned seed);
// (v1 Φ,1 - v2 Φ,2)(v1 - v2) > 0 on random samples with v1 != v2.
CheckResult check_baker_ericksen(const StoredEnergy& model, int samples,
                                 unsigned seed);
// Φ,1 at the identity within tol.
CheckResult check_stress_free(const StoredEnergy& model, double tol);

}  // namespace cavity
