#include "cavity/gravity.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "cavity/error.hpp"
#include "cavity/radial_field.hpp"

namespace cavity {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

bool parse_double(std::string_view text, double& out) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r' || text.back() == '\t'))
    text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

DensityProfile DensityProfile::constant(double rho0) {
  if (!(rho0 >= 0.0) || !std::isfinite(rho0))
    throw InvalidParameter("constant density must be finite and >= 0");
  DensityProfile p;
  p.constant_ = rho0;
  p.k0_ = p.k1_ = rho0;
  return p;
}

DensityProfile DensityProfile::tabulated(std::vector<double> radii, std::vector<double> rho) {
  if (radii.size() < 2 || radii.size() != rho.size())
    throw InvalidParameter("density table needs >= 2 (R, rho0) rows");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1]))
      throw InvalidParameter("density table radii must strictly increase");
  if (radii.front() > 0.0 || radii.back() < 1.0)
    throw InvalidParameter("density table must cover [0, 1]");
  for (double r : rho)
    if (!(r > 0.0) || !std::isfinite(r))
      throw InvalidParameter("tabulated density must be positive (k0 > 0)");

  DensityProfile p;
  p.table_.emplace(std::move(radii), std::move(rho));

  // bounds and cumulative mass on a uniform grid, 4-point Gauss per cell
  std::vector<double> gx, gw;
  gauss_legendre(4, gx, gw);
  const std::size_t n = kMassGridNodes;
  std::vector<double> grid(n), mass(n, 0.0);
  p.k0_ = std::numeric_limits<double>::infinity();
  p.k1_ = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = static_cast<double>(i) / static_cast<double>(n - 1);
    double rho_i = (*p.table_)(grid[i]);
    p.k0_ = std::min(p.k0_, rho_i);
    p.k1_ = std::max(p.k1_, rho_i);
  }
  for (std::size_t i = 1; i < n; ++i) {
    double a = grid[i - 1], b = grid[i], cell = 0.0;
    for (std::size_t j = 0; j < gx.size(); ++j) {
      double u = 0.5 * (a + b) + 0.5 * (b - a) * gx[j];
      double rho_u = (*p.table_)(u);
      p.k0_ = std::min(p.k0_, rho_u);
      p.k1_ = std::max(p.k1_, rho_u);
      cell += 0.5 * (b - a) * gw[j] * rho_u * u * u;
    }
    mass[i] = mass[i - 1] + kFourPi * cell;
  }
  if (!(p.k0_ > 0.0))
    throw InvalidParameter("interpolated density is not bounded away from zero");
  p.mass_.emplace(std::move(grid), std::move(mass));
  return p;
}

DensityProfile DensityProfile::from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open density file " + path.string());
  std::vector<double> radii, rho;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto comma = line.find(',');
    double R = 0, value = 0;
    bool ok = comma != std::string::npos &&
              parse_double(std::string_view(line).substr(0, comma), R) &&
              parse_double(std::string_view(line).substr(comma + 1), value);
    if (!ok) {
      if (radii.empty() && line_no == 1) continue;  // header
      throw ConfigError("malformed density row " + std::to_string(line_no) + " in " +
                        path.string());
    }
    radii.push_back(R);
    rho.push_back(value);
  }
  try {
    return tabulated(std::move(radii), std::move(rho));
  } catch (const InvalidParameter& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

double DensityProfile::operator()(double R) const {
  return table_ ? (*table_)(R) : constant_;
}

double DensityProfile::mass_within(double R) const {
  if (!(R >= 0.0 && R <= 1.0))
    throw DomainError("mass_within: R outside [0, 1]: " + std::to_string(R));
  if (!mass_) return kFourPi / 3.0 * constant_ * R * R * R;
  return (*mass_)(R);
}

double potential_energy(const DensityProfile& profile, const RadialField& field) {
  if (profile.is_zero()) return 0.0;
  auto R = field.nodes();
  auto r = field.values();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < R.size(); ++i) {
    double L = R[i + 1] - R[i];
    for (double t : {kGauss2Lo, kGauss2Hi}) {
      double x = R[i] + t * L;
      double y = r[i] + t * (r[i + 1] - r[i]);
      if (!(y > 0.0)) throw DomainError("potential_energy: r <= 0 inside the domain");
      total += kGauss2Weight * L * profile(x) * profile.mass_within(x) / y * x * x;
    }
  }
  return total;
}

double brute_force_potential(const DensityProfile& profile, const RadialField& field,
                             const QuadSpec& quad) {
  if (profile.is_zero()) return 0.0;

  // composite 4-point Gauss: nodes/4 uniform panels per integral
  std::vector<double> gx, gw;
  gauss_legendre(4, gx, gw);
  auto rule = [&](double a, double b, std::size_t nodes, auto&& f) {
    std::size_t panels = std::max<std::size_t>(1, nodes / gx.size());
    double h = (b - a) / static_cast<double>(panels), sum = 0.0;
    for (std::size_t k = 0; k < panels; ++k) {
      double lo = a + h * static_cast<double>(k);
      for (std::size_t j = 0; j < gx.size(); ++j) sum += 0.5 * h * gw[j] * f(lo + 0.5 * h * (1.0 + gx[j]));
    }
    return sum;
  };

  const double a = field.inner_radius();
  double outer = rule(a, 1.0, quad.outer_nodes, [&](double R) {
    double rR = field.value(R);
    auto kernel = [&](double U) {
      double rU = field.value(U);
      return profile(U) * U * U / (rR * rU) * (rR + rU - std::abs(rR - rU));
    };
    std::size_t n_in = std::max<std::size_t>(gx.size(), quad.inner_nodes / 2);
    double inner = rule(a, R, n_in, kernel) + rule(R, 1.0, n_in, kernel);
    return profile(R) * R * R * 2.0 * std::numbers::pi * inner;
  });
  return 0.5 * kFourPi * outer;
}

}  // namespace cavity
