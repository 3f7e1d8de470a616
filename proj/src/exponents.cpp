#include "mapfluct/exponents.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace mapfluct {

using cplx = std::complex<double>;

Eigen::MatrixXcd char_matrix_exponent(const MapSpec& spec, double theta) {
  const int n = spec.n();
  Eigen::MatrixXcd out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        out(i, i) = spec.components[i].exponent(theta) - spec.components[i].killing + spec.Q(i, i);
      } else {
        const auto& F = spec.F[i][j];
        out(i, j) = spec.Q(i, j) * (F ? F->char_fn(theta) : cplx(1.0, 0.0));
      }
    }
  }
  return out;
}

Eigen::MatrixXd ladder_laplace_exponent(const LadderSpec& ladder, double lambda) {
  const int n = ladder.n();
  Eigen::MatrixXd out(n, n);
  for (int i = 0; i < n; ++i) {
    double phi = ladder.killing[i] + ladder.drift[i] * lambda;
    if (const auto& cp = ladder.jumps[i]) phi += cp->rate * (1.0 - cp->law.laplace(lambda));
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        out(i, i) = phi - ladder.Q(i, i);
      } else {
        const auto& F = ladder.F[i][j];
        out(i, j) = -ladder.Q(i, j) * (F ? F->laplace(lambda) : 1.0);
      }
    }
  }
  return out;
}

Eigen::MatrixXcd ladder_exponent_imag(const LadderSpec& ladder, double theta) {
  const int n = ladder.n();
  Eigen::MatrixXcd out(n, n);
  const cplx z(0.0, -theta);
  for (int i = 0; i < n; ++i) {
    cplx phi = ladder.killing[i] + ladder.drift[i] * z;
    if (const auto& cp = ladder.jumps[i]) phi += cp->rate * (1.0 - cp->law.char_fn(theta));
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        out(i, i) = phi - ladder.Q(i, i);
      } else {
        const auto& F = ladder.F[i][j];
        out(i, j) = -ladder.Q(i, j) * (F ? F->char_fn(theta) : cplx(1.0, 0.0));
      }
    }
  }
  return out;
}

SpectralReport spectral_bound_check(const MapSpec& spec, const std::vector<double>& thetas,
                                    const std::vector<double>& lambdas) {
  SpectralReport rep;
  const int n = spec.n();
  for (double th : thetas) {
    const Eigen::MatrixXcd psi = char_matrix_exponent(spec, th);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(psi, false);
    for (int k = 0; k < n; ++k) {
      const double re = es.eigenvalues()(k).real();
      if (re > rep.max_real_part) {
        rep.max_real_part = re;
        rep.theta_at_max = th;
      }
    }
    for (double lam : lambdas) {
      const Eigen::MatrixXcd M = lam * Eigen::MatrixXcd::Identity(n, n) - psi;
      rep.min_abs_det = std::min(rep.min_abs_det, std::abs(M.partialPivLu().determinant()));
    }
  }
  return rep;
}

std::string to_string(Dichotomy d) {
  switch (d) {
    case Dichotomy::Transient: return "Transient";
    case Dichotomy::Oscillating: return "Oscillating";
    case Dichotomy::NegativeDrift: return "NegativeDrift";
    default: return "Undetermined";
  }
}

DichotomyResult drift_dichotomy(const MapSpec& spec, double tol) {
  DichotomyResult res;
  const Eigen::VectorXd pi = stationary_of_Q(spec.Q);
  const int n = spec.n();
  double drift = 0.0;
  for (int i = 0; i < n; ++i) {
    const Moment m = spec.components[i].mean();
    if (!m.finite) {
      res.note = "phase " + std::to_string(i) + " has no finite mean";
      res.phase_means.push_back(kInf);
      continue;
    }
    double total = m.value;
    for (int j = 0; j < n; ++j) {
      if (j == i || spec.Q(i, j) <= 0.0 || !spec.F[i][j]) continue;
      const Moment mj = spec.F[i][j]->mean();
      if (!mj.finite) {
        res.note = "transitional law " + std::to_string(i) + "->" + std::to_string(j) + " has no finite mean";
        total = kInf;
        break;
      }
      total += spec.Q(i, j) * mj.value;
    }
    res.phase_means.push_back(m.value);
    drift += pi(i) * total;
  }
  if (!res.note.empty()) {
    res.verdict = Dichotomy::Undetermined;
    res.drift = std::numeric_limits<double>::quiet_NaN();
    return res;
  }
  res.drift = drift;
  res.verdict = drift > tol ? Dichotomy::Transient : drift < -tol ? Dichotomy::NegativeDrift : Dichotomy::Oscillating;
  return res;
}

}  // namespace mapfluct
