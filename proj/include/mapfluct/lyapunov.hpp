#pragma once

#include "mapfluct/map_spec.hpp"

#include <vector>

namespace mapfluct {

enum class LyapunovKind { Exponential, Polynomial };

// Resolvent drift condition for the overshoot process with R = lambda U_lambda.
//  exponential: V(x) = e^{lambda x}, R V <= V/2 + b
//  polynomial:  V(x) = e^{lambda x} on [0,1), x^lambda beyond, lambda > 1,
//               R V <= V - phi(V) + c 1{x <= x*}, phi(z) = z^{1-1/lambda}/2
struct LyapunovReport {
  LyapunovKind kind = LyapunovKind::Exponential;
  double lambda = 0.0;
  double beta0 = 0.5;
  double b = 0.0;              // b or b-tilde
  double inv_norm = 0.0;       // ||Phi+(lambda)^{-1}||_inf
  double x_star = 0.0;         // polynomial only
  double c_tilde = 0.0;        // polynomial only
  double phi_exponent = 0.0;   // 1 - 1/lambda, polynomial only
  std::vector<double> xs;
  std::vector<std::vector<double>> lhs;  // [phase][x] R V
  std::vector<std::vector<double>> rhs;  // [phase][x] bound
  double max_violation = 0.0;  // max of lhs - rhs
  bool holds = false;
};

double lyapunov_v(LyapunovKind kind, double lambda, double x);
// lambda Q_lambda V(x)
double lambda_q_v(LyapunovKind kind, double lambda, double x);

// Throws ComputeError naming the first law without the needed moment.
LyapunovReport lyapunov_drift_report(const LadderSpec& ladder, double lambda, LyapunovKind kind,
                                     const std::vector<double>& xs, double tol = 1e-8);

// 2 (1 + t/(2 lambda))^{1 - lambda}
double subgeometric_rate(double lambda, double t);

}  // namespace mapfluct
