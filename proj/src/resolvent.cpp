#include "mapfluct/resolvent.hpp"

#include "mapfluct/exponents.hpp"
#include "mapfluct/parallel.hpp"
#include "mapfluct/rng.hpp"
#include "mapfluct/simulator.hpp"

#include <cmath>

namespace mapfluct {

TestFunction TestFunction::constant(int n, double c) { return exponential(std::vector<double>(static_cast<std::size_t>(n), c), 0.0); }

TestFunction TestFunction::exponential(std::vector<double> weight, double kappa) {
  TestFunction f;
  f.terms.push_back({kappa, std::move(weight)});
  return f;
}

TestFunction TestFunction::custom(std::function<double(double, int)> g) {
  TestFunction f;
  f.generic = std::move(g);
  return f;
}

double TestFunction::operator()(double y, int j) const {
  double v = 0.0;
  for (const auto& t : terms) v += t.weight[static_cast<std::size_t>(j)] * std::exp(-t.kappa * y);
  if (generic) v += generic(y, j);
  return v;
}

TestFunction TestFunction::operator+(const TestFunction& o) const {
  TestFunction r = *this;
  r.terms.insert(r.terms.end(), o.terms.begin(), o.terms.end());
  if (o.generic) {
    if (r.generic) {
      auto a = r.generic, b = o.generic;
      r.generic = [a, b](double y, int j) { return a(y, j) + b(y, j); };
    } else {
      r.generic = o.generic;
    }
  }
  return r;
}

TestFunction TestFunction::scaled(double c) const {
  TestFunction r = *this;
  for (auto& t : r.terms)
    for (auto& w : t.weight) w *= c;
  if (r.generic) {
    auto g = r.generic;
    r.generic = [g, c](double y, int j) { return c * g(y, j); };
  }
  return r;
}

namespace {

// int_0^x e^{-lambda t} e^{-kappa (x - t)} dt
double q_exp(double kappa, double lambda, double x) {
  if (x <= 0.0) return 0.0;
  const double d = kappa - lambda;
  if (std::abs(d * x) < 1e-13) return x * std::exp(-kappa * x);
  return std::exp(-kappa * x) * std::expm1(d * x) / d;
}

double laplace_or_throw(const JumpLaw& law, double s) {
  const Moment m = law.exp_moment(-s);
  if (!m.finite) throw ComputeError("law " + law.describe() + " has no finite exponential moment of order " + std::to_string(-s));
  return m.value;
}

double q_generic(const std::function<double(double, int)>& g, double x, int i, double lambda, double tol) {
  if (x <= 0.0) return 0.0;
  return integrate([&](double t) { return std::exp(-lambda * t) * g(x - t, i); }, 0.0, x, tol);
}

}  // namespace

double q_lambda(const TestFunction& f, double x, int i, double lambda, double tol) {
  if (!(lambda > 0.0)) throw SpecError("lambda must be > 0");
  double v = 0.0;
  for (const auto& t : f.terms) v += t.weight[static_cast<std::size_t>(i)] * q_exp(t.kappa, lambda, x);
  if (f.generic) v += q_generic(f.generic, x, i, lambda, tol);
  return v;
}

double q_lambda_expect(const TestFunction& f, const JumpLaw& law, int i, double lambda, double tol) {
  double v = 0.0;
  for (const auto& t : f.terms) {
    const double w = t.weight[static_cast<std::size_t>(i)];
    if (w == 0.0) continue;
    const double d = t.kappa - lambda;
    if (std::abs(d) < 1e-9) {
      v += w * law.expect([&](double y) { return q_exp(t.kappa, lambda, y); });
    } else {
      v += w * (laplace_or_throw(law, lambda) - laplace_or_throw(law, t.kappa)) / d;
    }
  }
  if (f.generic) v += law.expect([&](double y) { return q_generic(f.generic, y, i, lambda, tol); });
  return v;
}

Eigen::VectorXd resolvent_psi(const LadderSpec& ladder, const TestFunction& f, double lambda) {
  const int n = ladder.n();
  Eigen::VectorXd psi(n);
  for (int i = 0; i < n; ++i) {
    double v = ladder.drift[i] * f(0.0, i);
    if (const auto& cp = ladder.jumps[i]) v += cp->rate * q_lambda_expect(f, cp->law, i, lambda);
    for (int j = 0; j < n; ++j) {
      if (j == i || ladder.Q(i, j) <= 0.0) continue;
      const JumpLaw law = ladder.transition_law(i, j);
      v += ladder.Q(i, j) * q_lambda_expect(f, law, j, lambda);
    }
    psi(i) = v;
  }
  return psi;
}

double resolvent(const LadderSpec& ladder, const TestFunction& f, double x, int i, double lambda) {
  if (!(lambda > 0.0)) throw SpecError("lambda must be > 0");
  const Eigen::MatrixXd phi = ladder_laplace_exponent(ladder, lambda);
  auto lu = phi.fullPivLu();
  if (!lu.isInvertible()) throw ComputeError("ladder exponent matrix is singular (reducible modulator?)");
  const Eigen::VectorXd h = lu.solve(resolvent_psi(ladder, f, lambda));
  return q_lambda(f, x, i, lambda) + std::exp(-lambda * x) * h(i);
}

McEstimate resolvent_monte_carlo(const LadderSpec& ladder, const TestFunction& f, double x, int i, double lambda,
                                 std::size_t n_paths, std::uint64_t seed, int workers) {
  const WalkerModel model = WalkerModel::from_ladder(ladder);
  double wmax = 1.0;
  for (const auto& t : f.terms)
    for (double w : t.weight) wmax = std::max(wmax, std::abs(w));
  const double top = x + (36.0 + std::log(wmax)) / lambda;
  struct Acc {
    CompensatedSum s, s2;
    std::size_t n = 0;
  };
  Acc acc = chunked_reduce<Acc>(
      n_paths, 1024, workers, [] { return Acc{}; },
      [&](std::size_t b, std::size_t e, Acc& a) {
        for (std::size_t k = b; k < e; ++k) {
          Rng rng(seed, k);
          double total = 0.0;
          SawtoothVisitor vis;
          vis.creep = [&](double lo, double hi, int ph) {
            const double base = std::exp(-lambda * lo) * (-std::expm1(-lambda * (hi - lo))) / lambda;
            for (const auto& t : f.terms) total += t.weight[static_cast<std::size_t>(ph)] * base;
            if (f.generic) total += f.generic(0.0, ph) * base;
          };
          vis.ramp = [&](double lo, double hi, int ph) {
            const double L = hi - lo;
            for (const auto& t : f.terms) {
              const double d = lambda - t.kappa;
              const double inner = std::abs(d * L) < 1e-13 ? L : std::expm1(d * L) / d;
              total += t.weight[static_cast<std::size_t>(ph)] * std::exp(-lambda * hi) * inner;
            }
            if (f.generic)
              total += integrate([&](double t) { return std::exp(-lambda * t) * f.generic(hi - t, ph); }, lo, hi, 1e-10);
          };
          walk_sawtooth(model, x, i, top, rng, vis);
          a.s.add(total);
          a.s2.add(total * total);
          a.n += 1;
        }
      },
      [](Acc& a, const Acc& b) {
        a.s.add(b.s.value());
        a.s2.add(b.s2.value());
        a.n += b.n;
      });
  McEstimate est;
  est.n = acc.n;
  const double N = static_cast<double>(acc.n);
  est.mean = acc.s.value() / N;
  const double var = std::max(acc.s2.value() / N - est.mean * est.mean, 0.0) * N / std::max(N - 1.0, 1.0);
  est.se = std::sqrt(var / N);
  return est;
}

}  // namespace mapfluct
