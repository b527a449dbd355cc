#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace cavity {

// x^e with a multiply-only fast path for small integer exponents. The
// solver evaluates these millions of times per flow, and the model
// parameters used in practice are integers.
class Power {
 public:
  Power() = default;
  explicit Power(double exponent);

  double exponent() const { return exponent_; }
  double operator()(double x) const {
    if (!integral_) return std::pow(x, exponent_);
    double base = n_ < 0 ? 1.0 / x : x;
    int k = n_ < 0 ? -n_ : n_;
    double out = 1.0;
    while (k > 0) {
      if (k & 1) out *= base;
      base *= base;
      k >>= 1;
    }
    return out;
  }

 private:
  double exponent_ = 1.0;
  int n_ = 1;
  bool integral_ = true;
};

// Two-point Gauss-Legendre on [0, 1]: abscissae and the common weight.
inline constexpr double kGauss2Lo = 0.21132486540518711775;  // (1 - 1/sqrt3)/2
inline constexpr double kGauss2Hi = 0.78867513459481288225;
inline constexpr double kGauss2Weight = 0.5;

// Gauss-Legendre nodes/weights on [-1, 1] (Golub-Welsch free, Newton on P_n).
void gauss_legendre(std::size_t n, std::vector<double>& nodes,
                    std::vector<double>& weights);

// Solves a tridiagonal system in place (Thomas algorithm, no pivoting; the
// callers only pass symmetric positive definite matrices). `lower[i]`
// couples row i+1 to column i. Throws GridError on a zero pivot.
std::vector<double> solve_tridiagonal(std::span<const double> lower,
                                      std::span<const double> diag,
                                      std::span<const double> upper,
                                      std::span<const double> rhs);

// Fritsch-Carlson monotone piecewise cubic Hermite interpolant.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double derivative(double x) const;
  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }
  const std::vector<double>& xs() const { return x_; }
  const std::vector<double>& ys() const { return y_; }

 private:
  std::size_t segment(double x) const;

  std::vector<double> x_, y_, slope_;
};

struct RootResult {
  double x = 0.0;
  double fx = 0.0;
  double lo = 0.0;  // final bracket
  double hi = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Safeguarded secant (Dekker/Brent) on a bracket with f(a)·f(b) <= 0.
// Secant or inverse-quadratic steps that leave the bracket, or fail to
// shrink it fast enough, fall back to bisection.
RootResult find_root(const std::function<double(double)>& f, double a,
                     double b, double fa, double fb, double xtol,
                     double ftol, int max_iterations);

// Shortest text that reads back to the same double.
std::string format_double(double x);
// Joins values with commas, each formatted with format_double.
std::string csv_row(std::initializer_list<double> values);

}  // namespace cavity
