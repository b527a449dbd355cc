#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cavity/error.hpp"
#include "cavity/numerics.hpp"
#include "cavity/ode.hpp"

using namespace cavity;

TEST(Power, MatchesStdPowForIntegerAndFractionalExponents) {
  for (double e : {-5.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 7.0, 0.5, -1.5, 2.25}) {
    Power p(e);
    for (double x : {0.013, 0.7, 1.0, 1.9, 23.0})
      EXPECT_NEAR(p(x), std::pow(x, e), 1e-13 * std::pow(x, e)) << e << " " << x;
  }
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  std::vector<double> x, w;
  gauss_legendre(5, x, w);
  double s0 = 0.0, s8 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s0 += w[i];
    s8 += w[i] * std::pow(x[i], 8);
  }
  EXPECT_NEAR(s0, 2.0, 1e-14);
  EXPECT_NEAR(s8, 2.0 / 9.0, 1e-14);
}

TEST(GaussLegendre, TwoPointConstantsOnUnitInterval) {
  std::vector<double> x, w;
  gauss_legendre(2, x, w);
  EXPECT_NEAR(0.5 * (1.0 + std::min(x[0], x[1])), kGauss2Lo, 1e-15);
  EXPECT_NEAR(0.5 * (1.0 + std::max(x[0], x[1])), kGauss2Hi, 1e-15);
}

TEST(Tridiagonal, MatchesDenseSolution) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  const std::size_t n = 40;
  std::vector<double> lo(n - 1), di(n), up(n - 1), x(n), b(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) lo[i] = up[i] = -u(rng);
  for (std::size_t i = 0; i < n; ++i) {
    di[i] = 2.5 + u(rng);
    x[i] = u(rng) - 0.5;
  }
  for (std::size_t i = 0; i < n; ++i) {
    b[i] = di[i] * x[i];
    if (i > 0) b[i] += lo[i - 1] * x[i - 1];
    if (i + 1 < n) b[i] += up[i] * x[i + 1];
  }
  auto sol = solve_tridiagonal(lo, di, up, b);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(sol[i], x[i], 1e-13);
}

TEST(Tridiagonal, ZeroPivotThrows) {
  std::vector<double> lo{1.0}, di{0.0, 1.0}, up{1.0}, b{1.0, 1.0};
  EXPECT_THROW(solve_tridiagonal(lo, di, up, b), GridError);
}

TEST(MonotoneCubic, InterpolatesAndStaysMonotone) {
  std::vector<double> x{0.0, 0.1, 0.5, 0.6, 1.0}, y{0.0, 0.01, 0.02, 0.8, 1.0};
  MonotoneCubic f(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(f(x[i]), y[i]);
  double prev = f(0.0);
  for (int k = 1; k <= 1000; ++k) {
    double v = f(k / 1000.0);
    EXPECT_GE(v, prev - 1e-15);
    prev = v;
  }
  const double h = 1e-6;
  EXPECT_NEAR(f.derivative(0.3), (f(0.3 + h) - f(0.3 - h)) / (2 * h), 1e-6);
}

TEST(FindRoot, SmoothFunction) {
  auto f = [](double x) { return std::cos(x) - x; };
  auto r = find_root(f, 0.0, 1.0, f(0.0), f(1.0), 1e-14, 1e-15, 100);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x, 0.73908513321516064, 1e-14);
  EXPECT_LT(r.iterations, 15);
}

TEST(FindRoot, JumpIsLocatedToMachineResolution) {
  auto f = [](double x) { return x < 0.3 ? -1.0 : 1.0; };
  auto r = find_root(f, 0.0, 1.0, -1.0, 1.0, 1e-10, 1e-8, 200);
  EXPECT_FALSE(r.converged);
  EXPECT_LE(r.hi - r.lo, 1e-15);
  EXPECT_NEAR(r.x, 0.3, 1e-15);
}

TEST(FindRoot, RequiresSignChange) {
  auto f = [](double x) { return x * x + 1.0; };
  EXPECT_THROW(find_root(f, -1.0, 1.0, 2.0, 2.0, 1e-12, 0.0, 10), InvalidParameter);
}

namespace {
bool oscillator(double, const ode::State<2>& y, ode::State<2>& d) {
  d[0] = y[1];
  d[1] = -y[0];
  return true;
}
}  // namespace

TEST(Dopri5, HarmonicOscillatorForwardAndBackward) {
  ode::Options o;
  o.rtol = 1e-10;
  o.atol = 1e-12;
  auto fwd = ode::integrate_dopri5<2>(oscillator, 0.0, {0.0, 1.0}, 10.0, o);
  ASSERT_EQ(fwd.status, ode::Status::reached_end);
  EXPECT_NEAR(fwd.y_end[0], std::sin(10.0), 1e-8);
  EXPECT_NEAR(fwd.eval(3.3)[0], std::sin(3.3), 1e-8);
  auto back = ode::integrate_dopri5<2>(oscillator, 10.0, fwd.y_end, 0.0, o);
  ASSERT_EQ(back.status, ode::Status::reached_end);
  EXPECT_NEAR(back.y_end[0], 0.0, 1e-8);
  EXPECT_NEAR(back.eval(7.1)[1], std::cos(7.1), 1e-8);
}

TEST(Dopri5, FifthOrderLocalAccuracy) {
  // global error should fall roughly in proportion to the tolerance
  ode::Options a, b;
  a.rtol = 1e-6, a.atol = 1e-8;
  b.rtol = 1e-9, b.atol = 1e-11;
  double ea = std::abs(ode::integrate_dopri5<2>(oscillator, 0.0, {0.0, 1.0}, 5.0, a).y_end[0] - std::sin(5.0));
  double eb = std::abs(ode::integrate_dopri5<2>(oscillator, 0.0, {0.0, 1.0}, 5.0, b).y_end[0] - std::sin(5.0));
  EXPECT_LT(eb, ea / 100.0);
}

TEST(Dopri5, RefusedStateStopsAtTheBoundary) {
  // y' = -1 from y(0) = 1; the right-hand side refuses y <= 0
  auto rhs = [](double, const ode::State<1>& y, ode::State<1>& d) {
    if (!(y[0] > 0.0)) return false;
    d[0] = -1.0;
    return true;
  };
  ode::Options o;
  auto s = ode::integrate_dopri5<1>(rhs, 0.0, {1.0}, 5.0, o);
  EXPECT_EQ(s.status, ode::Status::step_underflow);
  ASSERT_TRUE(s.failed_state.has_value());
  EXPECT_LE((*s.failed_state)[0], 0.0);
  EXPECT_NEAR(s.t_end, 1.0, o.atol);
  EXPECT_LE(s.y_end[0], o.atol);
}

TEST(Dopri5, StepBudget) {
  ode::Options o;
  o.max_steps = 5;
  auto s = ode::integrate_dopri5<2>(oscillator, 0.0, {0.0, 1.0}, 100.0, o);
  EXPECT_EQ(s.status, ode::Status::step_budget);
  EXPECT_LT(s.t_end, 100.0);
}
