#include "mapfluct/lyapunov.hpp"

#include "mapfluct/exponents.hpp"

#include <cmath>

namespace mapfluct {

double lyapunov_v(LyapunovKind kind, double lambda, double x) {
  if (kind == LyapunovKind::Exponential || x < 1.0) return std::exp(lambda * x);
  return std::pow(x, lambda);
}

namespace {

// Q_lambda V(x) without the factor lambda
double q_v(LyapunovKind kind, double lambda, double x) {
  if (x <= 0.0) return 0.0;
  if (kind == LyapunovKind::Exponential || x < 1.0) return std::sinh(lambda * x) / lambda;
  const double head = integrate([&](double s) { return std::exp(-lambda * (x - s)) * std::pow(s, lambda); }, 1.0, x, 1e-12);
  return head + std::exp(-lambda * x) * std::expm1(2.0 * lambda) / (2.0 * lambda);
}

void require_moment(const JumpLaw& law, LyapunovKind kind, double lambda, const std::string& where) {
  const Moment m = kind == LyapunovKind::Exponential ? law.exp_moment(lambda) : law.abs_moment(lambda);
  if (!m.finite) {
    const std::string what = kind == LyapunovKind::Exponential ? "exponential moment" : "moment";
    throw ComputeError(where + " law " + law.describe() + " has no finite " + what + " of order " + std::to_string(lambda));
  }
}

double expect_q_v(const JumpLaw& law, LyapunovKind kind, double lambda) {
  if (kind == LyapunovKind::Exponential)
    return (law.exp_moment(lambda).value - law.exp_moment(-lambda).value) / (2.0 * lambda);
  return law.expect([&](double y) { return q_v(kind, lambda, y); }, {1.0});
}

// e^{-lambda x} (b + K + int_1^x (lambda-1) e^{lambda t} t^{lambda-2} dt), written without overflow.
// K = lambda int_0^1 e^{2 lambda s} ds = (e^{2 lambda} - 1)/2 is the exact head term of
// lambda Q_lambda V; the shorter constant e^lambda is too small once sinh(lambda) > 1.
double psi_poly(double lambda, double b, double x) {
  double v = std::exp(-lambda * x) * (b + 0.5 * std::expm1(2.0 * lambda));
  auto g = [&](double t) { return (lambda - 1.0) * std::exp(-lambda * (x - t)) * std::pow(t, lambda - 2.0); };
  if (x >= 1.0)
    v += integrate(g, 1.0, x, 1e-12);
  else
    v -= integrate_singular(g, x, 1.0, 1e-12);
  return v;
}

}  // namespace

double lambda_q_v(LyapunovKind kind, double lambda, double x) { return lambda * q_v(kind, lambda, x); }

LyapunovReport lyapunov_drift_report(const LadderSpec& ladder, double lambda, LyapunovKind kind,
                                     const std::vector<double>& xs, double tol) {
  if (!(lambda > 0.0)) throw SpecError("lambda must be > 0");
  if (kind == LyapunovKind::Polynomial && !(lambda > 1.0)) throw SpecError("polynomial drift needs lambda > 1");
  auto rep_v = validate(ladder);
  if (!rep_v.ok) throw SpecError("invalid ladder spec: " + rep_v.summary());
  const int n = ladder.n();
  for (int i = 0; i < n; ++i) {
    if (const auto& cp = ladder.jumps[i]) require_moment(cp->law, kind, lambda, "jump (phase " + std::to_string(i) + ")");
    for (int j = 0; j < n; ++j)
      if (j != i && ladder.Q(i, j) > 0.0)
        require_moment(ladder.transition_law(i, j), kind, lambda,
                       "transitional " + std::to_string(i) + "->" + std::to_string(j));
  }

  LyapunovReport rep;
  rep.kind = kind;
  rep.lambda = lambda;
  rep.xs = xs;
  Eigen::VectorXd psi(n);
  for (int i = 0; i < n; ++i) {
    double v = ladder.drift[i];
    if (const auto& cp = ladder.jumps[i]) v += cp->rate * expect_q_v(cp->law, kind, lambda);
    for (int j = 0; j < n; ++j)
      if (j != i && ladder.Q(i, j) > 0.0) v += ladder.Q(i, j) * expect_q_v(ladder.transition_law(i, j), kind, lambda);
    psi(i) = v;
  }
  const Eigen::MatrixXd phi = ladder_laplace_exponent(ladder, lambda);
  auto lu = phi.fullPivLu();
  if (!lu.isInvertible()) throw ComputeError("ladder exponent matrix is singular");
  const Eigen::MatrixXd inv = lu.inverse();
  rep.inv_norm = inv.cwiseAbs().rowwise().sum().maxCoeff();
  rep.b = lambda * rep.inv_norm * psi.sum();
  const Eigen::VectorXd h = inv * psi;

  if (kind == LyapunovKind::Polynomial) {
    rep.phi_exponent = 1.0 - 1.0 / lambda;
    // x*: beyond it psi_lambda(x) <= x^{lambda-1}/2 on the scan grid
    double last_bad = 1.0;
    bool any_bad = false;
    double x = 1.0;
    while (x < 1e4) {
      if (psi_poly(lambda, rep.b, x) > 0.5 * std::pow(x, lambda - 1.0)) {
        last_bad = x;
        any_bad = true;
      }
      x = x < 100.0 ? x + 0.01 : x * 1.001;
    }
    rep.x_star = any_bad ? last_bad + 0.01 : 1.0;
    double mx = -kInf;
    for (double y = 0.0; y <= rep.x_star + 1e-12; y += 0.01) mx = std::max(mx, psi_poly(lambda, rep.b, y));
    mx = std::max(mx, psi_poly(lambda, rep.b, rep.x_star));
    rep.c_tilde = std::exp(lambda - 1.0) + mx;
  }

  rep.lhs.assign(static_cast<std::size_t>(n), {});
  rep.rhs.assign(static_cast<std::size_t>(n), {});
  rep.max_violation = -kInf;
  for (int i = 0; i < n; ++i) {
    for (double x : xs) {
      const double v = lyapunov_v(kind, lambda, x);
      const double lhs = lambda_q_v(kind, lambda, x) + lambda * std::exp(-lambda * x) * h(i);
      double rhs;
      if (kind == LyapunovKind::Exponential)
        rhs = rep.beta0 * v + rep.b;
      else
        rhs = v - 0.5 * std::pow(v, rep.phi_exponent) + (x <= rep.x_star ? rep.c_tilde : 0.0);
      rep.lhs[i].push_back(lhs);
      rep.rhs[i].push_back(rhs);
      rep.max_violation = std::max(rep.max_violation, lhs - rhs);
    }
  }
  rep.holds = rep.max_violation <= tol;
  return rep;
}

double subgeometric_rate(double lambda, double t) {
  if (!(lambda > 1.0)) throw SpecError("subgeometric rate needs lambda > 1");
  if (t < 0.0) throw SpecError("t must be >= 0");
  return 2.0 * std::pow(1.0 + t / (2.0 * lambda), 1.0 - lambda);
}

}  // namespace mapfluct
