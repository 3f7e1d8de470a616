#include "mapfluct/empirical.hpp"
#include "mapfluct/exponents.hpp"
#include "mapfluct/lyapunov.hpp"
#include "mapfluct/resolvent.hpp"
#include "mapfluct/simulator.hpp"
#include "mapfluct/stationary.hpp"

#include <doctest.h>

#include <cmath>

using namespace mapfluct;

namespace {

Eigen::MatrixXd mat2(double a, double b, double c, double d) {
  Eigen::MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

LevyComponent comp(double drift, double rate, const JumpLaw& law) {
  LevyComponent c;
  c.drift = drift;
  if (rate > 0.0) c.jumps = CompoundPoisson{rate, law};
  return c;
}

LadderSpec pure_drift_ladder(double d0, double d1) {
  LadderSpec l;
  l.drift = {d0, d1};
  l.killing = {0.0, 0.0};
  l.jumps = {std::nullopt, std::nullopt};
  l.Q = mat2(-1, 1, 1, -1);
  l.F.assign(2, std::vector<std::optional<JumpLaw>>(2));
  return l;
}

LadderSpec ladder_two_phase() {
  LadderSpec l = pure_drift_ladder(1.0, 0.5);
  l.jumps = {CompoundPoisson{1.0, JumpLaw::exponential(2.0)}, CompoundPoisson{2.0, JumpLaw::exponential(3.0)}};
  l.F = {{std::nullopt, JumpLaw::exponential(1.0)}, {JumpLaw::exponential(1.0), std::nullopt}};
  return l;
}

LadderSpec one_phase_ladder(double d, double c, double mu) {
  LadderSpec l;
  l.drift = {d};
  l.killing = {0.0};
  l.jumps = {CompoundPoisson{c, JumpLaw::exponential(mu)}};
  l.Q = Eigen::MatrixXd::Zero(1, 1);
  l.F.assign(1, std::vector<std::optional<JumpLaw>>(1));
  return l;
}

}  // namespace

TEST_CASE("characteristic matrix exponent") {
  MapSpec s;
  s.components = {comp(1.0, 1.0, JumpLaw::exponential(2.0)), comp(-0.5, 2.0, JumpLaw::uniform(-1, 1))};
  s.Q = mat2(-1, 1, 2, -2);
  s.F = {{std::nullopt, JumpLaw::exponential(1.0)}, {JumpLaw::point_mass(0.3), std::nullopt}};
  const Eigen::MatrixXcd at0 = char_matrix_exponent(s, 0.0);
  CHECK((at0 - s.Q.cast<std::complex<double>>()).cwiseAbs().maxCoeff() == 0.0);

  // entry (0,1) = q01 E e^{i th D01} = 1/(1 - i th)
  const double th = 0.7;
  const Eigen::MatrixXcd m = char_matrix_exponent(s, th);
  CHECK(std::abs(m(0, 1) - 1.0 / std::complex<double>(1.0, -th)) < 1e-12);
  // diagonal (0,0): i th - th^2... for drift + CPP: i th + (2/(2 - i th) - 1) - 1
  const std::complex<double> I(0.0, 1.0);
  CHECK(std::abs(m(0, 0) - (I * th + (2.0 / (2.0 - I * th) - 1.0) - 1.0)) < 1e-12);
}

TEST_CASE("ladder Laplace exponent") {
  const LadderSpec l = pure_drift_ladder(1.0, 2.0);
  const Eigen::MatrixXd at0 = ladder_laplace_exponent(l, 0.0);
  CHECK((at0 + l.Q).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::MatrixXd at1 = ladder_laplace_exponent(l, 1.0);
  CHECK((at1 - mat2(2, -1, -1, 3)).cwiseAbs().maxCoeff() < 1e-14);

  // the imaginary version agrees with the real one along the analytic continuation at theta = 0
  const Eigen::MatrixXcd im = ladder_exponent_imag(ladder_two_phase(), 0.0);
  CHECK((im.real() - ladder_laplace_exponent(ladder_two_phase(), 0.0)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("spectral bound") {
  MapSpec s;
  s.components = {comp(1.0, 1.0, JumpLaw::exponential(2.0)), comp(-0.5, 2.0, JumpLaw::exponential(3.0).negate())};
  s.Q = mat2(-1, 1, 1, -1);
  s.F.assign(2, std::vector<std::optional<JumpLaw>>(2));
  std::vector<double> th;
  for (int k = -100; k <= 100; ++k) th.push_back(0.5 * k);
  const auto rep = spectral_bound_check(s, th, {0.1, 1.0, 10.0});
  CHECK(rep.bound_holds(1e-9));
  CHECK(rep.min_abs_det > 0.0);
  const auto at0 = spectral_bound_check(s, {0.0}, {1.0});
  CHECK(std::abs(at0.max_real_part) < 1e-12);
}

TEST_CASE("drift dichotomy") {
  MapSpec s;
  s.components = {comp(1.0, 0.0, JumpLaw::point_mass(0)), comp(-2.0, 0.0, JumpLaw::point_mass(0))};
  s.Q = mat2(-1, 1, 1, -1);
  s.F.assign(2, std::vector<std::optional<JumpLaw>>(2));
  auto d = drift_dichotomy(s);
  CHECK(d.drift == doctest::Approx(-0.5));
  CHECK(d.verdict == Dichotomy::NegativeDrift);

  MapSpec sym;
  sym.components = {comp(0.0, 1.0, JumpLaw::uniform(-1, 1)), comp(0.0, 2.0, JumpLaw::uniform(-2, 2))};
  sym.Q = mat2(-1, 1, 1, -1);
  sym.F = {{std::nullopt, JumpLaw::uniform(-1, 1)}, {JumpLaw::uniform(-1, 1), std::nullopt}};
  CHECK(drift_dichotomy(sym).verdict == Dichotomy::Oscillating);

  MapSpec heavy = sym;
  heavy.components[0] = comp(0.0, 1.0, JumpLaw::pareto(0.5, 1.0));
  CHECK(drift_dichotomy(heavy).verdict == Dichotomy::Undetermined);

  // law of large numbers on a Transient spec
  MapSpec tr;
  tr.components = {comp(1.0, 1.0, JumpLaw::exponential(1.0).negate()), comp(0.5, 1.0, JumpLaw::exponential(2.0))};
  tr.Q = mat2(-1, 1, 2, -2);
  tr.F.assign(2, std::vector<std::optional<JumpLaw>>(2));
  d = drift_dichotomy(tr);
  REQUIRE(d.verdict == Dichotomy::Transient);
  Rng rng(1, 0);
  const MapPath p = simulate_path(tr, 1e4, rng);
  CHECK(p.final_value() / 1e4 == doctest::Approx(d.drift).epsilon(0.1));
}

TEST_CASE("Q_lambda closed forms") {
  const TestFunction one = TestFunction::constant(1, 1.0);
  CHECK(q_lambda(one, 1.0, 0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
  CHECK(q_lambda(one, 0.0, 0, 3.0) == 0.0);
  const TestFunction e = TestFunction::exponential({1.0}, 1.0);
  CHECK(q_lambda(e, 2.0, 0, 1.0) == doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-14));
  // quadrature path agrees with the closed form
  const TestFunction g = TestFunction::custom([](double y, int) { return std::exp(-2.0 * y); });
  CHECK(q_lambda(g, 1.3, 0, 0.5) == doctest::Approx(q_lambda(TestFunction::exponential({1.0}, 2.0), 1.3, 0, 0.5)).epsilon(1e-9));
  CHECK_THROWS_AS(q_lambda(one, 1.0, 0, 0.0), SpecError);
}

TEST_CASE("resolvent of constants") {
  const LadderSpec l = ladder_two_phase();
  for (double lambda : {0.3, 1.0, 4.0})
    for (double x : {0.0, 0.7, 5.0})
      for (int i = 0; i < 2; ++i) {
        CHECK(resolvent(l, TestFunction::constant(2, 1.0), x, i, lambda) == doctest::Approx(1.0 / lambda).epsilon(1e-12));
        CHECK(resolvent(l, TestFunction::constant(2, 0.0), x, i, lambda) == 0.0);
      }
  LadderSpec red = l;
  red.Q = Eigen::MatrixXd::Zero(2, 2);
  red.F.assign(2, std::vector<std::optional<JumpLaw>>(2));
  red.jumps = {std::nullopt, std::nullopt};
  red.drift = {0.0, 0.0};
  CHECK_THROWS(resolvent(red, TestFunction::constant(2, 1.0), 0.0, 0, 1.0));
}

TEST_CASE("resolvent against Monte Carlo") {
  const LadderSpec l = ladder_two_phase();
  const TestFunction f = TestFunction::exponential({1.0, 1.0}, 1.0);
  for (double x : {0.0, 0.7}) {
    const double exact = resolvent(l, f, x, 0, 1.0);
    const auto mc = resolvent_monte_carlo(l, f, x, 0, 1.0, 20000, 7);
    CHECK(std::abs(mc.mean - exact) <= 4.0 * mc.se);
  }
}

TEST_CASE("invariant measure and stationary law") {
  const InvariantMeasure a(pure_drift_ladder(1.0, 2.0));
  CHECK(a.atom(0) == doctest::Approx(0.5));
  CHECK(a.atom(1) == doctest::Approx(1.0));
  CHECK(a.density(0.3, 0) == 0.0);
  CHECK(a.mass() == doctest::Approx(1.5));

  const InvariantMeasure b(one_phase_ladder(1.0, 1.0, 2.0));
  CHECK(b.mass() == doctest::Approx(1.5));
  CHECK(b.mass_by_quadrature() == doctest::Approx(b.mass()).epsilon(1e-10));
  const InvariantMeasure c(ladder_two_phase());
  CHECK(std::abs(c.mass_by_quadrature() - c.mass()) < 1e-8);

  std::vector<double> edges;
  for (int k = 0; k <= 100; ++k) edges.push_back(0.05 * k);
  const auto rho = stationary_distribution(one_phase_ladder(1.0, 1.0, 2.0), edges);
  CHECK(rho.atoms[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  // density e^{-2y}/1.5 integrated over the first bin
  CHECK(rho.bins[0][0] == doctest::Approx(-std::expm1(-0.1) / 2.0 / 1.5).epsilon(1e-10));
  CHECK(rho.mass() == doctest::Approx(1.0).epsilon(1e-12));

  const auto rd = stationary_distribution(pure_drift_ladder(1.0, 2.0), edges);
  CHECK(rd.atoms[0] == doctest::Approx(1.0 / 3.0));
  CHECK(rd.atoms[1] == doctest::Approx(2.0 / 3.0));

  LadderSpec heavy = one_phase_ladder(1.0, 1.0, 2.0);
  heavy.jumps[0] = CompoundPoisson{1.0, JumpLaw::pareto(0.5, 1.0)};
  CHECK_THROWS_WITH(stationary_distribution(heavy, edges), doctest::Contains("no stationary distribution"));
}

TEST_CASE("overshoot marginal") {
  const LadderSpec l = one_phase_ladder(1.0, 1.0, 2.0);
  std::vector<double> edges;
  for (int k = 0; k <= 100; ++k) edges.push_back(0.05 * k);
  PotentialOptions po;
  po.n_paths = 1;
  const auto U0 = estimate_potential_measure(l, {0.0, 1.0}, po);
  const auto d = overshoot_marginal(l, U0, 2.02, 0, 1.0, edges);
  CHECK(d.bins[0][20] == 1.0);

  std::vector<double> ue;
  for (int k = 0; k <= 400; ++k) ue.push_back(0.05 * k);
  po.n_paths = 20000;
  const auto U = estimate_potential_measure(l, ue, po);
  const auto m = overshoot_marginal(l, U, 0.0, 0, 19.0, edges);
  const auto rho = stationary_distribution(l, edges);
  CHECK(tv_distance(m, rho) <= 0.03);
}

TEST_CASE("Lyapunov drift") {
  const LadderSpec pd = pure_drift_ladder(1.0, 2.0);
  std::vector<double> xs;
  for (int k = 0; k <= 200; ++k) xs.push_back(0.1 * k);
  const auto r = lyapunov_drift_report(pd, 0.5, LyapunovKind::Exponential, xs);
  CHECK(r.holds);
  CHECK(r.b == doctest::Approx(0.5 * r.inv_norm * 3.0).epsilon(1e-12));

  const LadderSpec one = one_phase_ladder(1.0, 1.0, 2.0);
  CHECK(lyapunov_drift_report(one, 1.0, LyapunovKind::Exponential, xs).holds);
  CHECK_THROWS_AS(lyapunov_drift_report(one, 4.0, LyapunovKind::Exponential, xs), ComputeError);

  LadderSpec par = one;
  par.jumps[0] = CompoundPoisson{1.0, JumpLaw::pareto(4.0, 1.0)};
  CHECK_THROWS_WITH(lyapunov_drift_report(par, 0.5, LyapunovKind::Exponential, xs), doctest::Contains("Pareto"));
  CHECK(lyapunov_drift_report(par, 2.0, LyapunovKind::Polynomial, xs).holds);
}

TEST_CASE("subgeometric rate") {
  CHECK(subgeometric_rate(3.0, 0.0) == 2.0);
  CHECK(subgeometric_rate(2.0, 4.0) == doctest::Approx(1.0));
}
