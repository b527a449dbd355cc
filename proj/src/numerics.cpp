#include "cavity/numerics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

#include "cavity/error.hpp"

namespace cavity {

Power::Power(double exponent) : exponent_(exponent) {
  double rounded = std::round(exponent);
  integral_ = rounded == exponent && std::abs(rounded) <= 16.0;
  n_ = integral_ ? static_cast<int>(rounded) : 0;
}

void gauss_legendre(std::size_t n, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

std::vector<double> solve_tridiagonal(std::span<const double> lower,
                                      std::span<const double> diag,
                                      std::span<const double> upper,
                                      std::span<const double> rhs) {
  const std::size_t n = diag.size();
  std::vector<double> c(n), d(n);
  double pivot = diag[0];
  if (pivot == 0.0) throw GridError("tridiagonal solve: zero pivot at row 0");
  c[0] = n > 1 ? upper[0] / pivot : 0.0;
  d[0] = rhs[0] / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = diag[i] - lower[i - 1] * c[i - 1];
    if (pivot == 0.0 || !std::isfinite(pivot))
      throw GridError("tridiagonal solve: singular assembly");
    c[i] = i + 1 < n ? upper[i] / pivot : 0.0;
    d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / pivot;
  }
  for (std::size_t i = n - 1; i-- > 0;) d[i] -= c[i] * d[i + 1];
  return d;
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n)
    throw InvalidParameter("monotone interpolant needs >= 2 matching samples");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1]))
      throw InvalidParameter("interpolation abscissae must strictly increase");
  std::vector<double> delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i)
    delta[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
  slope_.assign(n, 0.0);
  slope_[0] = delta[0];
  slope_[n - 1] = delta[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) continue;
    // weighted harmonic mean (Fritsch-Butland)
    double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
    double w1 = 2.0 * h1 + h0, w2 = h1 + 2.0 * h0;
    slope_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
  }
}

std::size_t MonotoneCubic::segment(double x) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  return std::min(i, x_.size() - 2);
}

double MonotoneCubic::operator()(double x) const {
  std::size_t i = segment(x);
  double h = x_[i + 1] - x_[i];
  double t = (x - x_[i]) / h;
  double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * slope_[i] +
         (-2 * t3 + 3 * t2) * y_[i + 1] + (t3 - t2) * h * slope_[i + 1];
}

double MonotoneCubic::derivative(double x) const {
  std::size_t i = segment(x);
  double h = x_[i + 1] - x_[i];
  double t = (x - x_[i]) / h;
  double t2 = t * t;
  return ((6 * t2 - 6 * t) * y_[i] + (-6 * t2 + 6 * t) * y_[i + 1]) / h +
         (3 * t2 - 4 * t + 1) * slope_[i] + (3 * t2 - 2 * t) * slope_[i + 1];
}

RootResult find_root(const std::function<double(double)>& f, double a,
                     double b, double fa, double fb, double xtol,
                     double ftol, int max_iterations) {
  RootResult out;
  if (fa == 0.0) return {a, fa, a, a, 0, true};
  if (fb == 0.0) return {b, fb, b, b, 0, true};
  if ((fa > 0) == (fb > 0))
    throw InvalidParameter("find_root: endpoints do not bracket a sign change");

  // Brent's zeroin: b is the best iterate, a the previous one, c the
  // opposite end of the bracket.
  double c = a, fc = fa, d = b - a, e = d;
  int it = 0;
  for (; it < max_iterations; ++it) {
    if ((fb > 0) == (fc > 0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b, b = c, c = a;
      fa = fb, fb = fc, fc = fa;
    }
    // xtol only counts once the residual is small enough; otherwise keep
    // refining down to machine resolution.
    const double tol_mach = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b);
    const bool small = std::abs(fb) <= ftol;
    double tol = small ? tol_mach + 0.5 * xtol : tol_mach;
    double m = 0.5 * (c - b);
    if (small && std::abs(m) <= tol) {
      out.converged = true;
      break;
    }
    if (std::abs(m) <= tol_mach || fb == 0.0) {
      // bracket at machine resolution
      out.converged = std::abs(fb) <= ftol;
      break;
    }
    if (std::abs(e) < tol || std::abs(fa) <= std::abs(fb)) {
      d = e = m;
    } else {
      double s = fb / fa, p, q;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        double qq = fa / fc, r = fb / fc;
        p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0) q = -q; else p = -p;
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = e = m;
      }
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol ? d : (m > 0 ? tol : -tol);
    fb = f(b);
  }
  out.x = b;
  out.fx = fb;
  out.lo = std::min(b, c);
  out.hi = std::max(b, c);
  out.iterations = it;
  return out;
}

std::string format_double(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string csv_row(std::initializer_list<double> values) {
  std::string out;
  for (double v : values) {
    if (!out.empty()) out += ',';
    out += format_double(v);
  }
  return out;
}

}  // namespace cavity
