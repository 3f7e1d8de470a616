#pragma once

#include "mapfluct/map_spec.hpp"

#include <functional>
#include <vector>

namespace mapfluct {

// f(y, j) = sum_k w_k[j] exp(-kappa_k y), plus an optional generic part
// evaluated by quadrature. kappa may be negative (growing exponentials).
struct TestFunction {
  struct Term {
    double kappa = 0.0;
    std::vector<double> weight;  // per phase
  };
  std::vector<Term> terms;
  std::function<double(double, int)> generic;

  static TestFunction constant(int n, double c);
  static TestFunction exponential(std::vector<double> weight, double kappa);
  static TestFunction custom(std::function<double(double, int)> f);

  double operator()(double y, int j) const;
  TestFunction operator+(const TestFunction& o) const;
  TestFunction scaled(double c) const;
};

// Q_lambda f(x, i) = int_0^x e^{-lambda t} f(x - t, i) dt
double q_lambda(const TestFunction& f, double x, int i, double lambda, double tol = 1e-10);
// E[Q_lambda f(X, i)] for X with the given law
double q_lambda_expect(const TestFunction& f, const JumpLaw& law, int i, double lambda, double tol = 1e-10);

// psi_i = d_i f(0,i) + c_i E[Q f(X_i, i)] + sum_{j != i} q_ij E[Q f(D_ij, j)]
Eigen::VectorXd resolvent_psi(const LadderSpec& ladder, const TestFunction& f, double lambda);
// U_lambda f(x, i) = Q_lambda f(x, i) + e^{-lambda x} [Phi+(lambda)^{-1} psi]_i
double resolvent(const LadderSpec& ladder, const TestFunction& f, double x, int i, double lambda);

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

// Monte Carlo of E^{x,i} int_0^inf e^{-lambda t} f(O_t, J_t) dt over
// simulated sawtooth paths of the ladder.
McEstimate resolvent_monte_carlo(const LadderSpec& ladder, const TestFunction& f, double x, int i, double lambda,
                                 std::size_t n_paths, std::uint64_t seed, int workers = 0);

}  // namespace mapfluct
