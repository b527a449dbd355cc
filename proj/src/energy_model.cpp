#include "cavity/energy_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <sstream>

#include "cavity/error.hpp"

namespace cavity {

namespace {

void require_valid(const StretchState& s) {
  if (!s.valid() || !std::isfinite(s.v1) || !std::isfinite(s.v2) ||
      !std::isfinite(s.v3)) {
    std::ostringstream msg;
    msg << "non-positive principal stretch (" << s.v1 << ", " << s.v2 << ", "
        << s.v3 << ")";
    throw DomainError(msg.str());
  }
}

void require_radius(double R) {
  if (!(R >= 0.0 && R <= 1.0))
    throw DomainError("reference radius outside [0, 1]: " + std::to_string(R));
}

// least-squares slope of log y against log x
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double n = static_cast<double>(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

VolumetricTerm::VolumetricTerm(double C, double D, double gamma_exp,
                               double delta_exp)
    : C_(C),
      D_(D),
      gamma_(gamma_exp),
      gamma_m1_(gamma_exp - 1.0),
      gamma_m2_(gamma_exp - 2.0),
      delta_(-delta_exp),
      delta_p1_(-delta_exp - 1.0),
      delta_p2_(-delta_exp - 2.0) {
  if (!(C >= 0.0) || !(D >= 0.0))
    throw InvalidParameter("volumetric coefficients C, D must be >= 0");
  if (!(gamma_exp > 0.0) || !(delta_exp > 0.0))
    throw InvalidParameter("volumetric exponents γ, δ must be > 0");
}

double VolumetricTerm::value(double d) const {
  return C_ * gamma_(d) + D_ * delta_(d);
}

double VolumetricTerm::d1(double d) const {
  double g = gamma_.exponent(), dl = -delta_.exponent();
  return C_ * g * gamma_m1_(d) - D_ * dl * delta_p1_(d);
}

double VolumetricTerm::d2(double d) const {
  double g = gamma_.exponent(), dl = -delta_.exponent();
  return C_ * g * (g - 1.0) * gamma_m2_(d) + D_ * dl * (dl + 1.0) * delta_p2_(d);
}

double stress_free_D(double kappa, double C, double gamma_exp, double delta_exp) {
  if (delta_exp == 0.0)
    throw InvalidParameter("stress_free_D: δ must be non-zero");
  if (!(kappa > 0.0) || !(C >= 0.0) || !(gamma_exp > 0.0) || !(delta_exp > 0.0))
    throw InvalidParameter("stress_free_D: need κ > 0, C >= 0, γ > 0, δ > 0");
  return (kappa + C * gamma_exp) / delta_exp;
}

double h_min_argument(const VolumetricTerm& vol) {
  if (!(vol.C() > 0.0))
    throw InvalidParameter("h has no interior minimum when C = 0");
  if (!(vol.D() > 0.0))
    throw InvalidParameter("h has no interior minimum when D = 0");
  return std::pow(vol.D() * vol.delta_exp() / (vol.C() * vol.gamma_exp()),
                  1.0 / (vol.gamma_exp() + vol.delta_exp()));
}

// ---------------------------------------------------------------------------

PowerTerm::PowerTerm(double coef, double exponent)
    : coef_(coef), pow_(exponent), pow_m1_(exponent - 1.0), pow_m2_(exponent - 2.0) {
  if (!(exponent > 0.0)) throw InvalidParameter("power term exponent must be > 0");
  if (!(coef >= 0.0)) throw InvalidParameter("power term coefficient must be >= 0");
}

double PowerTerm::value(double v) const {
  return coef_ == 0.0 ? 0.0 : coef_ / pow_.exponent() * pow_(v);
}
double PowerTerm::d1(double v) const {
  return coef_ == 0.0 ? 0.0 : coef_ * pow_m1_(v);
}
double PowerTerm::d2(double v) const {
  return coef_ == 0.0 ? 0.0 : coef_ * (pow_.exponent() - 1.0) * pow_m2_(v);
}

// ---------------------------------------------------------------------------

WeightFunction::WeightFunction(double constant) : constant_(constant) {
  if (!(constant >= 0.0)) throw InvalidParameter("weight must be non-negative");
}

WeightFunction::WeightFunction(std::vector<double> samples,
                               std::optional<std::vector<double>> derivative_samples) {
  if (samples.size() < 2)
    throw InvalidParameter("tabulated weight needs at least 2 samples");
  for (double s : samples)
    if (!(s >= 0.0)) throw InvalidParameter("weight samples must be non-negative");
  std::vector<double> grid(samples.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = static_cast<double>(i) / static_cast<double>(grid.size() - 1);
  if (derivative_samples) {
    if (derivative_samples->size() != samples.size())
      throw InvalidParameter("weight derivative samples must match weight samples");
    derivative_.emplace(grid, std::move(*derivative_samples));
  }
  table_.emplace(std::move(grid), std::move(samples));
}

double WeightFunction::operator()(double R) const {
  return table_ ? (*table_)(R) : constant_;
}

double WeightFunction::derivative(double R) const {
  if (!table_) return 0.0;
  return derivative_ ? (*derivative_)(R) : table_->derivative(R);
}

double WeightFunction::min_value() const {
  if (!table_) return constant_;
  return *std::min_element(table_->ys().begin(), table_->ys().end());
}

double WeightFunction::max_value() const {
  if (!table_) return constant_;
  return *std::max_element(table_->ys().begin(), table_->ys().end());
}

// ---------------------------------------------------------------------------

PowerLawModel::PowerLawModel(double p, double kappa, VolumetricTerm vol)
    : kappa_(kappa), pow_p_(p), pow_pm1_(p - 1.0), pow_pm2_(p - 2.0), vol_(vol) {
  if (!(p > 0.0)) throw InvalidParameter("power-law exponent p must be > 0");
  if (!(kappa > 0.0)) throw InvalidParameter("κ must be > 0");
}

PowerLawModel PowerLawModel::reference() {
  const double kappa = 1.0, C = 1.0, g = 2.0, d = 2.0;
  return PowerLawModel(2.0, kappa, VolumetricTerm(C, stress_free_D(kappa, C, g, d), g, d));
}

double PowerLawModel::density(double R, const StretchState& s) const {
  require_valid(s);
  require_radius(R);
  double p = pow_p_.exponent();
  return kappa_ / p * (pow_p_(s.v1) + pow_p_(s.v2) + pow_p_(s.v3)) + vol_.value(s.det());
}

EnergyPartials PowerLawModel::partials(double R, const StretchState& s) const {
  require_valid(s);
  require_radius(R);
  const double d = s.det();
  const double h1 = vol_.d1(d), h2 = vol_.d2(d);
  const double v23 = s.v2 * s.v3, v13 = s.v1 * s.v3;
  EnergyPartials out;
  out.phi1 = kappa_ * pow_pm1_(s.v1) + h1 * v23;
  out.phi2 = kappa_ * pow_pm1_(s.v2) + h1 * v13;
  out.phi11 = kappa_ * (pow_p_.exponent() - 1.0) * pow_pm2_(s.v1) + h2 * v23 * v23;
  out.phi12 = h2 * v13 * v23 + h1 * s.v3;
  out.phi1R = 0.0;
  return out;
}

double PowerLawModel::growth_phi(double v) const {
  return kappa_ / pow_p_.exponent() * pow_p_(v);
}

std::optional<double> PowerLawModel::no_cavitation_floor() const {
  if (!(vol_.C() > 0.0) || !(vol_.D() > 0.0)) return std::nullopt;
  return std::cbrt(h_min_argument(vol_));
}

// ---------------------------------------------------------------------------

InhomogeneousModel::InhomogeneousModel(WeightFunction alpha, WeightFunction beta,
                                       WeightFunction gamma_w, PowerTerm phi,
                                       PowerTerm psi, VolumetricTerm vol)
    : alpha_(std::move(alpha)),
      beta_(std::move(beta)),
      gamma_w_(std::move(gamma_w)),
      phi_(phi),
      psi_(psi),
      vol_(vol) {
  if (!(alpha_.min_value() > 0.0) || !(gamma_w_.min_value() > 0.0))
    throw InvalidParameter("α(R) and γ(R) must be positive on [0, 1]");
  if (!(beta_.min_value() >= 0.0))
    throw InvalidParameter("β(R) must be non-negative on [0, 1]");
}

double InhomogeneousModel::density(double R, const StretchState& s) const {
  require_valid(s);
  require_radius(R);
  double sum_phi = phi_.value(s.v1) + phi_.value(s.v2) + phi_.value(s.v3);
  double sum_psi = psi_.is_zero() ? 0.0
                                  : psi_.value(s.v1 * s.v2) + psi_.value(s.v1 * s.v3) +
                                        psi_.value(s.v2 * s.v3);
  return alpha_(R) * sum_phi + beta_(R) * sum_psi + gamma_w_(R) * vol_.value(s.det());
}

EnergyPartials InhomogeneousModel::partials(double R, const StretchState& s) const {
  require_valid(s);
  require_radius(R);
  const double a = alpha_(R), b = beta_(R), g = gamma_w_(R);
  const double da = alpha_.derivative(R), db = beta_.derivative(R),
               dg = gamma_w_.derivative(R);
  const double d = s.det(), h1 = vol_.d1(d), h2 = vol_.d2(d);
  const double v12 = s.v1 * s.v2, v13 = s.v1 * s.v3, v23 = s.v2 * s.v3;

  double psi1 = 0, psi2 = 0, psi11 = 0, psi12 = 0;
  if (!psi_.is_zero()) {
    psi1 = psi_.d1(v12) * s.v2 + psi_.d1(v13) * s.v3;
    psi2 = psi_.d1(v12) * s.v1 + psi_.d1(v23) * s.v3;
    psi11 = psi_.d2(v12) * s.v2 * s.v2 + psi_.d2(v13) * s.v3 * s.v3;
    psi12 = psi_.d2(v12) * v12 + psi_.d1(v12);
  }
  EnergyPartials out;
  out.phi1 = a * phi_.d1(s.v1) + b * psi1 + g * h1 * v23;
  out.phi2 = a * phi_.d1(s.v2) + b * psi2 + g * h1 * v13;
  out.phi11 = a * phi_.d2(s.v1) + b * psi11 + g * h2 * v23 * v23;
  out.phi12 = b * psi12 + g * (h2 * v13 * v23 + h1 * s.v3);
  out.phi1R = da * phi_.d1(s.v1) + db * psi1 + dg * h1 * v23;
  return out;
}

double InhomogeneousModel::comparison_density(const StretchState& s) const {
  require_valid(s);
  return phi_.value(s.v1) + phi_.value(s.v2) + phi_.value(s.v3) +
         psi_.value(s.v1 * s.v2) + psi_.value(s.v1 * s.v3) + psi_.value(s.v2 * s.v3) +
         vol_.value(s.det());
}

double InhomogeneousModel::growth_phi(double v) const {
  return alpha_.min_value() * phi_.value(v);
}

double InhomogeneousModel::growth_h(double d) const {
  return gamma_w_.min_value() * vol_.value(d);
}

std::optional<double> InhomogeneousModel::no_cavitation_floor() const {
  bool beta_zero = psi_.is_zero() || (beta_.is_constant() && beta_.max_value() == 0.0);
  bool gamma_one = gamma_w_.is_constant() && gamma_w_(0.0) == 1.0;
  if (!beta_zero || !gamma_one) return std::nullopt;
  for (int i = 0; i <= 200; ++i)
    if (alpha_.derivative(i / 200.0) > 1e-12) return std::nullopt;
  if (!(vol_.C() > 0.0) || !(vol_.D() > 0.0)) return std::nullopt;
  return std::cbrt(h_min_argument(vol_));
}

// ---------------------------------------------------------------------------

const CheckResult* GrowthReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

bool GrowthReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.passed; });
}

GrowthReport validate_growth(const StoredEnergy& model, const ProbeSpec& probe) {
  GrowthReport report;

  // H1: φ(v) >= C v^q with 1 < q < 3, q fitted on the large-v range.
  auto vs = log_grid(probe.v_fit_lo, probe.v_fit_hi, 41);
  std::vector<double> phis;
  for (double v : vs) phis.push_back(model.growth_phi(v));
  double q = 0.0, c_lower = 0.0;
  bool phi_positive = std::all_of(phis.begin(), phis.end(), [](double x) { return x > 0; });
  if (phi_positive) {
    q = log_log_slope(vs, phis);
    c_lower = phis[0] / std::pow(vs[0], q);
    for (std::size_t i = 0; i < vs.size(); ++i)
      c_lower = std::min(c_lower, phis[i] / std::pow(vs[i], q));
  }
  {
    CheckResult c{"H1", phi_positive && q > 1.0 + 1e-6 && q < 3.0 - 1e-6 && c_lower > 0, q, ""};
    std::ostringstream msg;
    msg << "fitted exponent " << q << ", lower constant " << c_lower;
    c.detail = msg.str();
    report.checks.push_back(c);
  }

  // H2: h(d)/d increasing without bound.
  {
    auto ds = log_grid(1.0, probe.d_large, 61);
    std::vector<double> ratio;
    for (double d : ds) ratio.push_back(model.growth_h(d) / d);
    bool increasing = true;
    for (std::size_t i = ds.size() / 2; i + 1 < ds.size(); ++i)
      increasing = increasing && ratio[i + 1] > ratio[i];
    std::vector<double> upper_d(ds.begin() + ds.size() / 2, ds.end());
    std::vector<double> upper_r(ratio.begin() + ratio.size() / 2, ratio.end());
    bool positive = std::all_of(upper_r.begin(), upper_r.end(), [](double x) { return x > 0; });
    double slope = positive ? log_log_slope(upper_d, upper_r) : 0.0;
    CheckResult c{"H2", increasing && positive && slope > 1e-2, slope, ""};
    c.detail = "growth exponent of h(d)/d: " + std::to_string(slope);
    report.checks.push_back(c);
  }

  // H3: h(d) >= K d^(-s), s = q/(q-1); checked as d^s h(d) bounded below
  // away from zero as d -> 0.
  {
    CheckResult c{"H3", false, 0.0, ""};
    if (q > 1.0) {
      double s = q / (q - 1.0);
      auto ds = log_grid(probe.d_small, probe.d_large, 141);
      std::vector<double> f;
      for (double d : ds) f.push_back(std::pow(d, s) * model.growth_h(d));
      double k_est = *std::min_element(f.begin(), f.end());
      std::vector<double> small_d(ds.begin(), ds.begin() + 30), small_f(f.begin(), f.begin() + 30);
      bool positive = k_est > 0.0;
      double slope = positive ? log_log_slope(small_d, small_f) : 1.0;
      c.passed = positive && slope <= 1e-3;
      c.value = k_est;
      std::ostringstream msg;
      msg << "s = " << s << ", K estimate " << k_est << ", small-d slope " << slope;
      c.detail = msg.str();
    } else {
      c.detail = "H1 exponent <= 1, s undefined";
    }
    report.checks.push_back(c);
  }

  // H4: v²/(v³-1)² Φ̃(1/v², v, v) integrable on (η, ∞). Integrate decade by
  // decade in log v and require the increments to die out.
  {
    std::vector<double> gx, gw;
    gauss_legendre(8, gx, gw);
    auto integrand = [&](double v) {
      double v3 = v * v * v;
      return v * v / ((v3 - 1.0) * (v3 - 1.0)) *
             model.comparison_density({1.0 / (v * v), v, v});
    };
    auto integrate = [&](double a, double b) {
      double la = std::log(a), lb = std::log(b), total = 0.0;
      const int panels = 16;
      for (int k = 0; k < panels; ++k) {
        double u0 = la + (lb - la) * k / panels, u1 = la + (lb - la) * (k + 1) / panels;
        for (std::size_t j = 0; j < gx.size(); ++j) {
          double u = 0.5 * (u0 + u1) + 0.5 * (u1 - u0) * gx[j];
          double v = std::exp(u);
          total += 0.5 * (u1 - u0) * gw[j] * integrand(v) * v;
        }
      }
      return total;
    };
    std::vector<double> increments;
    double lo = probe.eta, total = 0.0;
    while (lo < probe.v_max) {
      double hi = std::min(lo * 10.0, probe.v_max);
      double inc = integrate(lo, hi);
      increments.push_back(inc);
      total += inc;
      lo = hi;
    }
    bool finite = std::isfinite(total);
    bool decaying = increments.size() >= 3;
    for (std::size_t i = increments.size() >= 3 ? increments.size() - 3 : 0;
         i + 1 < increments.size(); ++i)
      decaying = decaying && std::abs(increments[i + 1]) < std::abs(increments[i]);
    double last = increments.empty() ? 0.0 : std::abs(increments.back());
    CheckResult c{"H4", finite && decaying && last <= 1e-3 * std::abs(total) + 1e-12, total, ""};
    std::ostringstream msg;
    msg << "integral to " << probe.v_max << " = " << total << ", last decade " << last;
    c.detail = msg.str();
    report.checks.push_back(c);
  }

  // strict convexity of φ and h by second differences
  {
    auto grid = log_grid(1e-2, 1e2, 81);
    bool phi_convex = true, h_convex = true;
    for (double x : grid) {
      double dx = 1e-3 * x;
      double sphi = model.growth_phi(x + dx) - 2 * model.growth_phi(x) + model.growth_phi(x - dx);
      double sh = model.growth_h(x + dx) - 2 * model.growth_h(x) + model.growth_h(x - dx);
      phi_convex = phi_convex && sphi > 0.0;
      h_convex = h_convex && sh > 0.0;
    }
    report.checks.push_back({"convex_phi", phi_convex, 0.0, "second differences on [1e-2, 1e2]"});
    report.checks.push_back({"convex_h", h_convex, 0.0, "second differences on [1e-2, 1e2]"});
  }

  // derivative-bound ratio probe
  {
    std::mt19937_64 rng(probe.seed);
    std::uniform_real_distribution<double> dist(probe.sample_lo, probe.sample_hi);
    std::uniform_real_distribution<double> rdist(0.0, 1.0);
    const std::array<double, 3> scales = {0.9, 1.0, 1.1};
    double worst = 0.0;
    for (int i = 0; i < probe.samples; ++i) {
      StretchState s{dist(rng), dist(rng), dist(rng)};
      double R = rdist(rng);
      double base = model.density(R, s) + 1.0;
      for (double a1 : scales)
        for (double a2 : scales) {
          StretchState t{a1 * s.v1, a2 * s.v2, s.v3};
          auto pt = model.partials(R, t);
          worst = std::max(worst, std::abs(pt.phi1 * s.v1) / base);
          worst = std::max(worst, std::abs(pt.phi2 * s.v2) / base);
        }
    }
    report.derivative_ratio = worst;
  }
  return report;
}

CheckResult check_derivatives(const StoredEnergy& model, int samples, double rel_tol,
                              unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.2, 5.0);
  std::uniform_real_distribution<double> rdist(0.05, 0.95);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    StretchState s{dist(rng), dist(rng), dist(rng)};
    double R = rdist(rng);
    auto a = model.partials(R, s);
    double h1 = 1e-6 * std::max(1.0, s.v1), h2 = 1e-6 * std::max(1.0, s.v2);
    auto shifted = [&](double d1, double d2) { return StretchState{s.v1 + d1, s.v2 + d2, s.v3}; };
    double fd1 = (model.density(R, shifted(h1, 0)) - model.density(R, shifted(-h1, 0))) / (2 * h1);
    double fd2 = (model.density(R, shifted(0, h2)) - model.density(R, shifted(0, -h2))) / (2 * h2);
    double fd11 = (model.partials(R, shifted(h1, 0)).phi1 - model.partials(R, shifted(-h1, 0)).phi1) / (2 * h1);
    double fd12 = (model.partials(R, shifted(0, h2)).phi1 - model.partials(R, shifted(0, -h2)).phi1) / (2 * h2);
    auto rel = [](double exact, double approx) {
      return std::abs(exact - approx) / std::max(std::abs(exact), 1.0);
    };
    worst = std::max({worst, rel(a.phi1, fd1), rel(a.phi2, fd2), rel(a.phi11, fd11), rel(a.phi12, fd12)});
  }
  return {"derivatives", worst <= rel_tol, worst,
          "max relative deviation from central differences"};
}

CheckResult check_baker_ericksen(const StoredEnergy& model, int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.2, 5.0);
  std::uniform_real_distribution<double> rdist(0.0, 1.0);
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    StretchState s{dist(rng), dist(rng), dist(rng)};
    if (s.v1 == s.v2) continue;
    auto pt = model.partials(rdist(rng), s);
    double be = (s.v1 * pt.phi1 - s.v2 * pt.phi2) * (s.v1 - s.v2);
    worst = std::min(worst, be);
  }
  return {"baker_ericksen", worst > 0.0, worst, "min of (v1Φ,1 - v2Φ,2)(v1 - v2)"};
}

CheckResult check_stress_free(const StoredEnergy& model, double tol) {
  double t = model.partials(0.5, {1.0, 1.0, 1.0}).phi1;
  return {"stress_free", std::abs(t) <= tol, t, "Φ,1 at the identity"};
}

}  // namespace cavity
