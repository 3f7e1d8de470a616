#include "mapfluct/numerics.hpp"
#include "mapfluct/parallel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include <array>
#include <cmath>

namespace mapfluct {

namespace {
int g_workers = 0;
}

int default_workers() {
  if (g_workers > 0) return g_workers;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

void set_default_workers(int n) { g_workers = n; }

double integrate(const std::function<double(double)>& f, double a, double b, double tol, double* error) {
  if (a == b) return 0.0;
  if (a > b) return -integrate(f, b, a, tol, error);
  double err = 0.0;
  double l1 = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, tol, &err, &l1);
  if (error) *error = err;
  return v;
}

double integrate_singular(const std::function<double(double)>& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  static thread_local boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(f, a, b, tol);
}

double integrate_pieces(const std::function<double(double)>& f, const std::vector<double>& cuts, double tol) {
  CompensatedSum s;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) s.add(integrate(f, cuts[k], cuts[k + 1], tol));
  return s.value();
}

// Lanczos approximation (g = 7, 9 terms) with reflection.
std::complex<double> complex_lgamma(std::complex<double> z) {
  static const std::array<double, 9> c = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                                          771.32342877765313,   -176.61502916214059,   12.507343278686905,
                                          -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  const double pi = 3.14159265358979323846;
  if (z.real() < 0.5) {
    // log Gamma(z) = log(pi / sin(pi z)) - log Gamma(1 - z)
    return std::log(pi) - std::log(std::sin(pi * z)) - complex_lgamma(1.0 - z);
  }
  z -= 1.0;
  std::complex<double> x = c[0];
  for (int k = 1; k < 9; ++k) x += c[k] / (z + static_cast<double>(k));
  const std::complex<double> t = z + 7.5;
  return 0.5 * std::log(2.0 * pi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

double digamma(double x) { return boost::math::digamma(x); }

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol, int max_iter) {
  double flo = f(lo);
  for (int it = 0; it < max_iter && hi - lo > tol * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace mapfluct
