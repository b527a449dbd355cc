#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

namespace cavity::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct Options {
  double rtol = 1e-10;
  double atol = 1e-12;
  std::size_t max_steps = 200000;  // accepted + rejected
  double initial_step = 0.0;       // 0: automatic
};

enum class Status { reached_end, step_underflow, step_budget };

// One accepted step with the fourth-order continuous extension of the
// Dormand-Prince pair.
template <std::size_t N>
struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  std::array<State<N>, 5> rcont{};

  State<N> eval(double t) const {
    const double theta = (t - t0) / h, theta1 = 1.0 - theta;
    State<N> y;
    for (std::size_t i = 0; i < N; ++i)
      y[i] = rcont[0][i] +
             theta * (rcont[1][i] +
                      theta1 * (rcont[2][i] + theta * (rcont[3][i] + theta1 * rcont[4][i])));
    return y;
  }
};

template <std::size_t N>
struct Solution {
  Status status = Status::reached_end;
  double t_end = 0.0;  // last accepted time
  State<N> y_end{};
  // State at which the right-hand side last refused to evaluate (outside
  // its domain); set when the integration stalled against it.
  std::optional<State<N>> failed_state;
  std::vector<DenseStep<N>> steps;
  std::size_t accepted = 0;
  std::size_t rejected = 0;

  // Dense evaluation anywhere inside the integrated span.
  State<N> eval(double t) const {
    if (steps.empty()) return y_end;
    const bool backward = steps.front().h < 0.0;
    // steps are ordered along the integration direction
    auto it = std::lower_bound(steps.begin(), steps.end(), t,
                               [backward](const DenseStep<N>& s, double x) {
                                 double end = s.t0 + s.h;
                                 return backward ? end > x : end < x;
                               });
    if (it == steps.end()) --it;
    return it->eval(t);
  }
};

// Dormand-Prince 5(4) with FSAL, standard error-per-step control and dense
// output. `rhs(t, y, dy)` returns false when y lies outside the domain of
// the equation; the step is then rejected and retried with a quarter of
// the step size. Works in either direction of t.
template <std::size_t N, class Rhs>
Solution<N> integrate_dopri5(Rhs&& rhs, double t0, State<N> y0, double t1,
                             const Options& opt) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                   a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                   d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                   d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

  Solution<N> sol;
  sol.t_end = t0;
  sol.y_end = y0;
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  if (span == 0.0) return sol;

  State<N> k1, k2, k3, k4, k5, k6, k7, ytmp, y1;
  if (!rhs(t0, y0, k1)) {
    sol.status = Status::step_underflow;
    sol.failed_state = y0;
    return sol;
  }

  auto scaled_norm = [&](const State<N>& v, const State<N>& ref) {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      double sk = opt.atol + opt.rtol * std::abs(ref[i]);
      s += (v[i] / sk) * (v[i] / sk);
    }
    return std::sqrt(s / N);
  };

  double h = opt.initial_step;
  if (h <= 0.0) {
    double dn0 = scaled_norm(y0, y0), dn1 = scaled_norm(k1, y0);
    h = (dn0 < 1e-5 || dn1 < 1e-5) ? 1e-6 : 0.01 * dn0 / dn1;
    h = std::min(h, span);
  }
  h = std::min(std::abs(h), span) * dir;

  double t = t0;
  State<N> y = y0;
  std::optional<State<N>> failed;
  std::size_t attempts = 0;
  bool last_rejected = false;

  while (dir * (t1 - t) > 0.0) {
    if (attempts++ >= opt.max_steps) {
      sol.status = Status::step_budget;
      break;
    }
    const double h_min = 16.0 * std::numeric_limits<double>::epsilon() *
                         std::max(std::abs(t), std::numeric_limits<double>::min());
    if (std::abs(h) < h_min) {
      sol.status = Status::step_underflow;
      sol.failed_state = failed;
      break;
    }
    bool last = dir * (t + h - t1) >= 0.0;
    if (last) h = t1 - t;

    auto stage = [&](double c, auto&& combine, State<N>& k) {
      for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * combine(i);
      if (!rhs(t + c * h, ytmp, k)) {
        failed = ytmp;
        return false;
      }
      return true;
    };
    bool ok = stage(c2, [&](std::size_t i) { return a21 * k1[i]; }, k2) &&
              stage(c3, [&](std::size_t i) { return a31 * k1[i] + a32 * k2[i]; }, k3) &&
              stage(c4, [&](std::size_t i) { return a41 * k1[i] + a42 * k2[i] + a43 * k3[i]; }, k4) &&
              stage(c5, [&](std::size_t i) {
                return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i];
              }, k5) &&
              stage(1.0, [&](std::size_t i) {
                return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i];
              }, k6);
    if (ok) {
      for (std::size_t i = 0; i < N; ++i)
        y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
      const double t_new = last ? t1 : t + h;
      if (!rhs(t_new, y1, k7)) {
        failed = y1;
        ok = false;
      }
    }
    if (!ok) {
      ++sol.rejected;
      h *= 0.25;
      last_rejected = true;
      continue;
    }

    State<N> err, ref;
    for (std::size_t i = 0; i < N; ++i) {
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      ref[i] = std::max(std::abs(y[i]), std::abs(y1[i]));
    }
    double en = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      double sk = opt.atol + opt.rtol * ref[i];
      en += (err[i] / sk) * (err[i] / sk);
    }
    en = std::sqrt(en / N);
    if (!std::isfinite(en)) en = 1e10;

    if (en <= 1.0) {
      DenseStep<N> ds;
      ds.t0 = t;
      ds.h = h;
      for (std::size_t i = 0; i < N; ++i) {
        double ydiff = y1[i] - y[i];
        double bspl = h * k1[i] - ydiff;
        ds.rcont[0][i] = y[i];
        ds.rcont[1][i] = ydiff;
        ds.rcont[2][i] = bspl;
        ds.rcont[3][i] = ydiff - h * k7[i] - bspl;
        ds.rcont[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                              d6 * k6[i] + d7 * k7[i]);
      }
      sol.steps.push_back(ds);
      ++sol.accepted;
      t = last ? t1 : t + h;
      y = y1;
      k1 = k7;
      sol.t_end = t;
      sol.y_end = y;
      failed.reset();
      double fac = en > 0.0 ? 0.9 * std::pow(en, -0.2) : 10.0;
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 10.0);
      h *= fac;
      last_rejected = false;
    } else {
      ++sol.rejected;
      h *= std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9);
      last_rejected = true;
    }
  }
  return sol;
}

}  // namespace cavity::ode
