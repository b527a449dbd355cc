#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "cavity/error.hpp"
#include "cavity/gradient_flow.hpp"
#include "cavity/shooting.hpp"

using namespace cavity;

namespace {

const PowerLawModel kModel = PowerLawModel::reference();
const DensityProfile kRho1 = DensityProfile::constant(1.0);
const DensityProfile kRho0 = DensityProfile::constant(0.0);

FlowConfig config(double lambda, std::size_t nodes = 2001) {
  FlowConfig c;
  c.grid = canonical_grid(nodes, 1e-3);
  c.lambda = lambda;
  return c;
}

std::vector<double> tri_multiply(const Tridiagonal& K, const std::vector<double>& z) {
  const std::size_t n = K.diag.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = K.diag[i] * z[i];
    if (i > 0) out[i] += K.lower[i - 1] * z[i - 1];
    if (i + 1 < n) out[i] += K.upper[i] * z[i + 1];
  }
  return out;
}

RadialField perturbed(double lambda, std::size_t nodes) {
  auto grid = canonical_grid(nodes, 1e-2, 0.1);
  std::vector<double> r(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    r[i] = lambda * grid[i] + 0.02 * std::sin(3.0 * grid[i]) * (1.0 - grid[i]);
  return RadialField(grid, r);
}

}  // namespace

TEST(FlowStep, IdentityWithoutGravityIsStationary) {
  auto f = affine_map(1.0, canonical_grid(201, 1e-3));
  for (auto metric : {FlowMetric::h1, FlowMetric::weighted})
    for (double z : flow_step(kModel, kRho0, f, metric)) ASSERT_NEAR(z, 0.0, 1e-10);
}

TEST(FlowStep, SolvesTheMetricSystemAgainstTheDiscreteGradient) {
  // Dense finite-difference gradient of the discrete energy on 51 nodes.
  auto f = perturbed(1.0, 51);
  const std::vector<double> grid(f.nodes().begin(), f.nodes().end());
  const std::vector<double> r0(f.values().begin(), f.values().end());
  const std::size_t n = grid.size();
  std::vector<double> grad(n - 1);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    auto rp = r0, rm = r0;
    const double h = 1e-6 * rp[j];
    rp[j] += h;
    rm[j] -= h;
    grad[j] = (total_energy(kModel, kRho1, RadialField(grid, rp)) -
               total_energy(kModel, kRho1, RadialField(grid, rm))) / (2 * h);
  }
  for (auto metric : {FlowMetric::h1, FlowMetric::weighted}) {
    auto z = flow_step(kModel, kRho1, f, metric);
    ASSERT_EQ(z.size(), n);
    EXPECT_EQ(z.back(), 0.0);
    auto Kz = tri_multiply(flow_metric_matrix(kModel, f, metric), z);
    for (std::size_t j = 0; j + 1 < n; ++j)
      EXPECT_NEAR(Kz[j] + grad[j], 0.0, 1e-6 * (1 + std::abs(grad[j]))) << to_string(metric) << " " << j;
  }
}

TEST(FlowStep, RandomHatsSatisfyTheWeakEquation) {
  auto f = perturbed(1.1, 301);
  auto load = weak_form_load(kModel, kRho1, f);
  std::mt19937 rng(7);
  std::uniform_int_distribution<std::size_t> pick(0, f.size() - 2);
  for (auto metric : {FlowMetric::h1, FlowMetric::weighted}) {
    auto z = flow_step(kModel, kRho1, f, metric);
    auto Kz = tri_multiply(flow_metric_matrix(kModel, f, metric), z);
    for (int k = 0; k < 5; ++k) {
      const std::size_t j = pick(rng);
      EXPECT_NEAR(Kz[j] + load[j], 0.0, 1e-12 * (1 + std::abs(load[j]))) << j;
    }
  }
}

TEST(FlowStep, H1MatrixIsTheStiffnessOfHats) {
  auto f = affine_map(1.0, canonical_grid(11, 0.1, 1.0));
  auto K = flow_metric_matrix(kModel, f, FlowMetric::h1);
  const double h = 0.09;
  EXPECT_NEAR(K.diag[0], 1.0 / h, 1e-9);
  EXPECT_NEAR(K.diag[3], 2.0 / h, 1e-9);
  EXPECT_NEAR(K.upper[3], -1.0 / h, 1e-9);
  EXPECT_NEAR(K.lower[3], -1.0 / h, 1e-9);
}

TEST(FlowMinimize, GravityOffConvergesImmediately) {
  auto st = flow_minimize(kModel, kRho0, config(1.0));
  EXPECT_TRUE(st.converged);
  EXPECT_LE(st.step_index, 1u);
  for (std::size_t i = 0; i < st.field.size(); ++i) ASSERT_NEAR(st.field.values()[i], st.field.nodes()[i], 1e-8);
}

TEST(FlowMinimize, UnitStretchEnergy) {
  auto st = flow_minimize(kModel, kRho1, config(1.0));
  EXPECT_TRUE(st.converged) << to_string(st.stop);
  EXPECT_NEAR(total_energy(kModel, kRho1, st.field), 0.49074, 5e-3);
  EXPECT_EQ(st.field.values().back(), 1.0);
}

TEST(FlowMinimize, CavitatingPredictorAndDescent) {
  auto c = config(1.15);
  c.record_trace = true;
  auto st = flow_minimize(kModel, kRho1, c);
  EXPECT_TRUE(st.converged) << to_string(st.stop);
  EXPECT_GT(st.field.cavity(), 0.4);
  EXPECT_EQ(st.field.values().back(), 1.15);
  ASSERT_GE(st.energy_history.size(), 2u);
  for (std::size_t i = 1; i < st.energy_history.size(); ++i)
    ASSERT_LE(st.energy_history[i], st.energy_history[i - 1] + 1e-12 * std::abs(st.energy_history[i - 1])) << i;
  ASSERT_EQ(st.trace.size(), st.energy_history.size());

  auto path = std::filesystem::temp_directory_path() / "cavity_flow_trace.csv";
  write_flow_trace(st.trace, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "step,t,energy,step_norm");
}

TEST(FlowMinimize, H1MetricAlsoDescends) {
  auto c = config(1.0, 201);
  c.metric = FlowMetric::h1;
  c.max_steps = 200;
  auto st = flow_minimize(kModel, kRho1, c);
  ASSERT_GE(st.energy_history.size(), 2u);
  EXPECT_LT(st.energy_history.back(), st.energy_history.front());
  for (std::size_t i = 1; i < st.energy_history.size(); ++i)
    ASSERT_LE(st.energy_history[i], st.energy_history[i - 1] + 1e-12 * std::abs(st.energy_history[i - 1]));
}

TEST(FlowMinimize, InitialFieldIsResampledOntoTheGrid) {
  auto c = config(1.0, 101);
  c.init = affine_map(1.0, canonical_grid(51, 1e-3));
  c.max_steps = 3;
  auto st = flow_minimize(kModel, kRho1, c);
  ASSERT_EQ(st.field.size(), 101u);
  EXPECT_EQ(st.field.nodes()[37], c.grid[37]);
}

TEST(FlowMinimize, ConfigValidation) {
  auto c = config(1.0, 51);
  c.dt = 2.0;
  EXPECT_THROW(flow_minimize(kModel, kRho1, c), InvalidParameter);
  c = config(1.0, 51);
  c.stop_tol = 0.0;
  EXPECT_THROW(flow_minimize(kModel, kRho1, c), InvalidParameter);
}

TEST(FlowConsistency, LoadVanishesAtTheShootingSolution) {
  for (double lambda : {1.0, 1.15}) {
    auto res = solve_shooting(kModel, kRho1, lambda, 1e-3);
    ASSERT_TRUE(res.converged());
    EXPECT_LE(el_residual(kModel, kRho1, *res.field), 1e-3) << lambda;
    auto st = flow_minimize(kModel, kRho1, config(lambda));
    EXPECT_LE(st.field.sup_distance(*res.field), 1e-2) << lambda;
  }
}

TEST(FlowMeshRefinement, SecondOrderInTheEnergy) {
  // Doubling the intervals: each energy change is at most 4x the previous
  // one, and for a second-order scheme the changes shrink by ~4.
  std::vector<double> E;
  for (std::size_t n : {129u, 257u, 513u, 1025u}) {
    auto c = config(1.15, n);
    auto st = flow_minimize(kModel, kRho1, c);
    ASSERT_TRUE(st.converged) << n;
    E.push_back(total_energy(kModel, kRho1, st.field));
  }
  for (std::size_t k = 2; k < E.size(); ++k) {
    const double prev = std::abs(E[k - 1] - E[k - 2]), cur = std::abs(E[k] - E[k - 1]);
    EXPECT_LE(cur, 4 * prev);
    EXPECT_GE(std::log2(prev / cur), 1.9) << k;
  }
}

TEST(FlowMetric, Parsing) {
  EXPECT_EQ(flow_metric_from_string("h1"), FlowMetric::h1);
  EXPECT_EQ(flow_metric_from_string("weighted"), FlowMetric::weighted);
  EXPECT_THROW(flow_metric_from_string("l2"), ConfigError);
}
