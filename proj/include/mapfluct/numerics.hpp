#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mapfluct {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Bad user input (maps to CLI exit code 2).
struct SpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Something failed while computing (exit code 3).
struct ComputeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tri-state style moment answer: finite with a value, or infinite.
struct Moment {
  bool finite = true;
  double value = 0.0;
  static Moment of(double v) { return {true, v}; }
  static Moment infinite() { return {false, kInf}; }
};

// Adaptive Gauss-Kronrod on [a,b]; either end may be infinite.
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-11,
                 double* error = nullptr);
// tanh-sinh, for integrable endpoint singularities on a finite interval.
double integrate_singular(const std::function<double(double)>& f, double a, double b, double tol = 1e-11);
// Sum of integrate() over consecutive breakpoints.
double integrate_pieces(const std::function<double(double)>& f, const std::vector<double>& cuts,
                        double tol = 1e-11);

std::complex<double> complex_lgamma(std::complex<double> z);
double digamma(double x);

// Neumaier compensated sum.
struct CompensatedSum {
  double sum = 0.0, c = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      c += (sum - t) + x;
    else
      c += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

// Bisection root of a monotone function on [lo, hi].
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-13,
              int max_iter = 200);

}  // namespace mapfluct
