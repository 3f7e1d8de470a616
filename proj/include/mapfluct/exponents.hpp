#pragma once

#include "mapfluct/map_spec.hpp"

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace mapfluct {

// Psi(theta) = diag(Psi_i(theta)) + Q .* G(theta), G_ij = E exp(i theta D_ij).
Eigen::MatrixXcd char_matrix_exponent(const MapSpec& spec, double theta);

// Phi+(lambda) = diag(kill_i + d_i lambda + c_i (1 - E e^{-lambda X_i})) - Q .* G+(lambda).
Eigen::MatrixXd ladder_laplace_exponent(const LadderSpec& ladder, double lambda);
// Same matrix at the imaginary argument -i theta (so E e^{-zX} = E e^{i theta X}).
Eigen::MatrixXcd ladder_exponent_imag(const LadderSpec& ladder, double theta);

struct SpectralReport {
  double max_real_part = -kInf;
  double theta_at_max = 0.0;
  double min_abs_det = kInf;  // of lambda I - Psi(theta) over all sampled pairs
  bool bound_holds(double tol = 1e-9) const { return max_real_part <= tol; }
};

SpectralReport spectral_bound_check(const MapSpec& spec, const std::vector<double>& thetas,
                                    const std::vector<double>& lambdas);

enum class Dichotomy { Transient, Oscillating, NegativeDrift, Undetermined };
std::string to_string(Dichotomy d);

struct DichotomyResult {
  Dichotomy verdict = Dichotomy::Undetermined;
  double drift = 0.0;
  std::vector<double> phase_means;
  std::string note;
};

// Long-run drift sum_i pi_i (E xi^(i)_1 + sum_j q_ij E D_ij), verdict by sign.
DichotomyResult drift_dichotomy(const MapSpec& spec, double tol = 1e-9);

}  // namespace mapfluct
