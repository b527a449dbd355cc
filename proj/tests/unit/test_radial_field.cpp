#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "cavity/error.hpp"
#include "cavity/gravity.hpp"
#include "cavity/radial_field.hpp"

using namespace cavity;
constexpr double kPi = std::numbers::pi;

TEST(RadialField, ConstructionValidation) {
  EXPECT_NO_THROW(RadialField({0.1, 0.5, 1.0}, {0.2, 0.6, 1.1}));
  EXPECT_THROW(RadialField({0.1, 0.5, 0.9}, {0.2, 0.6, 1.1}), GridError);
  EXPECT_THROW(RadialField({0.1, 0.05, 1.0}, {0.2, 0.6, 1.1}), GridError);
  EXPECT_THROW(RadialField({0.1, 0.5, 1.0}, {0.2, 0.1, 1.1}), DomainError);
  EXPECT_THROW(RadialField({0.1, 0.5, 1.0}, {0.0, 0.6, 1.1}), DomainError);
  EXPECT_THROW(RadialField({0.1, 0.5, 1.0}, {0.2, 0.6}), GridError);
  EXPECT_NO_THROW(RadialField({0.0, 0.5, 1.0}, {0.0, 0.6, 1.1}));
}

TEST(RadialField, InterpolationAndStrains) {
  RadialField f({0.0, 0.5, 1.0}, {0.0, 0.4, 1.2});
  EXPECT_NEAR(f.value(0.25), 0.2, 1e-15);
  EXPECT_NEAR(f.slope(0.75), 1.6, 1e-15);
  auto s = f.strain(0.75);
  EXPECT_NEAR(s.v1, 1.6, 1e-15);
  EXPECT_NEAR(s.v2, 0.8 / 0.75, 1e-15);
  EXPECT_NEAR(s.det, s.v1 * s.v2 * s.v2, 1e-15);
  EXPECT_EQ(f.lambda(), 1.2);
  EXPECT_EQ(f.cavity(), 0.0);
}

TEST(Grids, CanonicalGridGeometry) {
  auto g = canonical_grid(2001, 1e-3);
  ASSERT_EQ(g.size(), 2001u);
  EXPECT_DOUBLE_EQ(g.front(), 1e-3);
  EXPECT_DOUBLE_EQ(g.back(), 1.0);
  for (std::size_t i = 1; i < g.size(); ++i) ASSERT_GT(g[i], g[i - 1]);
  const double first = g[1] - g[0], last = g.back() - g[g.size() - 2];
  EXPECT_NEAR(first / last, 1e-3, 1e-9);
  EXPECT_THROW(canonical_grid(1, 1e-3), GridError);
}

TEST(Maps, IncompressibleMap) {
  auto f = incompressible_map(1.15, uniform_grid(101, 0.0));
  EXPECT_NEAR(f.cavity(), std::cbrt(1.15 * 1.15 * 1.15 - 1.0), 1e-14);
  EXPECT_NEAR(f.cavity(), 0.80460, 5e-6);
  for (double R : {0.2, 0.6, 0.9}) {
    auto s = f.strain(R);
    EXPECT_NEAR(f.value(R), std::cbrt(R * R * R + 1.15 * 1.15 * 1.15 - 1.0), 1e-3);
    (void)s;
  }
  EXPECT_THROW(incompressible_map(0.9, uniform_grid(11, 0.0)), DomainError);
}

TEST(Energy, IdentityTotals) {
  auto m = PowerLawModel::reference();
  auto f = affine_map(1.0, uniform_grid(2001, 0.0));
  EXPECT_NEAR(mechanical_energy(m, f), 4.0 / 3.0, 1e-13);
  EXPECT_NEAR(total_energy(m, DensityProfile::constant(1.0), f), 4.0 / 3.0 - 4 * kPi / 15, 1e-9);
}

TEST(Energy, AffineMechanicalEnergyOnTruncatedDomain) {
  auto m = PowerLawModel::reference();
  const double lam = 1.1, eps = 1e-3;
  auto f = affine_map(lam, canonical_grid(301, eps));
  const double d = lam * lam * lam;
  const double phi = 1.5 * lam * lam + d * d + 1.5 / (d * d);
  EXPECT_NEAR(mechanical_energy(m, f), phi * (1.0 - eps * eps * eps) / 3.0, 1e-12);
}

TEST(Stress, IdentityIsStressFree) {
  auto m = PowerLawModel::reference();
  auto f = affine_map(1.0, uniform_grid(11, 0.0));
  EXPECT_NEAR(cauchy_stress(m, f, 0.5), 0.0, 1e-12);
}

TEST(WeakForm, LoadIsTheGradientOfTheDiscreteEnergy) {
  auto m = PowerLawModel::reference();
  auto p = DensityProfile::constant(1.0);
  auto grid = canonical_grid(51, 1e-2, 0.1);
  std::vector<double> r(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) r[i] = 0.05 + 1.05 * grid[i] - 0.05 * grid[i] * grid[i];
  RadialField f(grid, r);
  auto load = weak_form_load(m, p, f);
  ASSERT_EQ(load.size(), grid.size());
  EXPECT_EQ(load.back(), 0.0);
  for (std::size_t j = 0; j + 1 < grid.size(); j += 5) {
    const double h = 1e-5 * r[j];
    auto rp = r, rm = r;
    rp[j] += h;
    rm[j] -= h;
    const double fd = (total_energy(m, p, RadialField(grid, rp)) - total_energy(m, p, RadialField(grid, rm))) / (2 * h);
    EXPECT_NEAR(load[j], fd, 1e-7 + 1e-6 * std::abs(fd)) << j;
  }
}

TEST(WeakForm, EquilibriumOfIdentityWithoutGravity) {
  auto m = PowerLawModel::reference();
  auto f = affine_map(1.0, canonical_grid(101, 1e-3));
  EXPECT_LT(el_residual(m, DensityProfile::constant(0.0), f), 1e-12);
  EXPECT_GT(el_residual(m, DensityProfile::constant(1.0), f), 1e-3);
}

TEST(FieldCsv, RoundTrip) {
  auto m = PowerLawModel::reference();
  auto f = incompressible_map(1.15, canonical_grid(41, 1e-3));
  auto text = field_csv(m, f);
  EXPECT_EQ(text.rfind("R,r,dr,v2,T,det\n", 0), 0u);
  auto g = parse_field_csv(text);
  ASSERT_EQ(g.size(), f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    EXPECT_EQ(g.nodes()[i], f.nodes()[i]);
    EXPECT_EQ(g.values()[i], f.values()[i]);
  }
  EXPECT_THROW(parse_field_csv("x,y\n1,2\n"), ConfigError);
  auto path = std::filesystem::temp_directory_path() / "cavity_field_roundtrip.csv";
  write_field_csv(m, f, path);
  EXPECT_EQ(read_field_csv(path).values()[7], f.values()[7]);
  EXPECT_THROW(read_field_csv("/nonexistent/dir/x.csv"), IoError);
}

TEST(RadialField, SupDistanceAndResampling) {
  auto g = uniform_grid(11, 0.0);
  auto a = affine_map(1.0, g), b = affine_map(1.1, g);
  EXPECT_NEAR(a.sup_distance(b), 0.1, 1e-15);
  auto c = b.resampled(uniform_grid(21, 0.0));
  EXPECT_NEAR(c.value(0.35), 0.385, 1e-15);
}
