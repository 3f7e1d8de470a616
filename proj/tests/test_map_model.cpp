#include "mapfluct/map_spec.hpp"
#include "mapfluct/numerics.hpp"
#include "mapfluct/spec_io.hpp"

#include <doctest.h>

#include <cmath>

using namespace mapfluct;

namespace {

Eigen::MatrixXd mat2(double a, double b, double c, double d) {
  Eigen::MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

LevyComponent cpp_component(double drift, double rate, const JumpLaw& law) {
  LevyComponent c;
  c.drift = drift;
  c.jumps = CompoundPoisson{rate, law};
  return c;
}

MapSpec two_phase(const Eigen::MatrixXd& Q) {
  MapSpec s;
  s.components = {cpp_component(1.0, 1.0, JumpLaw::exponential(2.0)), cpp_component(-0.5, 2.0, JumpLaw::exponential(3.0))};
  s.Q = Q;
  s.F.assign(2, std::vector<std::optional<JumpLaw>>(2));
  return s;
}

bool has_message(const ValidationReport& r, const std::string& msg) {
  for (const auto& v : r.violations)
    if (v.message.find(msg) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("validation") {
  MapSpec s = two_phase(mat2(-1, 1, 1, -1));
  CHECK(validate(s).ok);

  MapSpec leaky = two_phase(mat2(-1, 1.1, 1, -1));
  const auto rep = validate(leaky);
  CHECK_FALSE(rep.ok);
  CHECK(has_message(rep, "Q row 0 not conservative"));

  MapSpec diag = two_phase(mat2(-1, 1, 1, -1));
  diag.F[0][0] = JumpLaw::exponential(1.0);
  CHECK(has_message(validate(diag), "diagonal transitional jump"));

  Eigen::MatrixXd neg = mat2(1, -1, 1, -1);
  CHECK_FALSE(validate(two_phase(neg)).ok);
}

TEST_CASE("stationary law of the modulator") {
  auto pi = stationary_of_Q(mat2(-1, 1, 1, -1));
  CHECK(pi(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(pi(1) == doctest::Approx(0.5).epsilon(1e-14));

  pi = stationary_of_Q(mat2(-2, 2, 1, -1));
  CHECK(pi(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(pi(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

  Eigen::MatrixXd cyc(3, 3);
  cyc << -1, 1, 0, 0, -1, 1, 1, 0, -1;
  pi = stationary_of_Q(cyc);
  for (int i = 0; i < 3; ++i) CHECK(pi(i) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  // random generators: pi Q = 0 and sums to one
  Eigen::MatrixXd R(4, 4);
  R << -3, 1, 1.5, 0.5, 0.2, -0.7, 0.4, 0.1, 2, 2, -5, 1, 0.3, 0.3, 0.3, -0.9;
  pi = stationary_of_Q(R);
  CHECK((pi.transpose() * R).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(pi.sum() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("dual MAP") {
  MapSpec s = two_phase(mat2(-2, 2, 1, -1));
  s.F[0][1] = JumpLaw::exponential(1.0);
  s.F[1][0] = JumpLaw::uniform(-1.0, 2.0);
  const MapSpec d = dualize(s);
  // pi = (1/3, 2/3): q^_01 = pi_1 q_10 / pi_0 = 2, q^_10 = pi_0 q_01 / pi_1 = 1
  CHECK(d.Q(0, 1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(d.Q(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  // components flip sign, transitional jumps are reversed and negated
  CHECK(d.components[0].mean().value == doctest::Approx(-s.components[0].mean().value));
  CHECK(d.F[0][1]->mean().value == doctest::Approx(-s.F[1][0]->mean().value).epsilon(1e-12));
  CHECK(approx_equal(dualize(d), s, 1e-12));

  // symmetric spec: the dual is the sign flip
  MapSpec sym;
  sym.components = {cpp_component(0.0, 1.0, JumpLaw::uniform(-1, 1)), cpp_component(0.0, 1.0, JumpLaw::uniform(-1, 1))};
  sym.Q = mat2(-1, 1, 1, -1);
  sym.F.assign(2, std::vector<std::optional<JumpLaw>>(2));
  const MapSpec sd = dualize(sym);
  CHECK(sd.Q.isApprox(sym.Q));
  for (int i = 0; i < 2; ++i)
    for (double th : {0.3, 1.7}) CHECK(std::abs(sd.components[i].exponent(th) - sym.components[i].exponent(th)) < 1e-12);
}

TEST_CASE("irreducibility") {
  CHECK(q_matrix_irreducible(mat2(-1, 1, 1, -1)));
  CHECK_FALSE(q_matrix_irreducible(mat2(0, 0, 1, -1)));
  Eigen::MatrixXd cyc(3, 3);
  cyc << -1, 1, 0, 0, -1, 1, 1, 0, -1;
  CHECK(q_matrix_irreducible(cyc));
}

TEST_CASE("ladder irreducibility witness") {
  MapSpec s = two_phase(mat2(-1, 1, 1, -1));
  s.components[1] = cpp_component(1.0, 1.0, JumpLaw::exponential(1.0));
  CHECK(ladder_irreducibility_sufficient(s).holds);

  // phase 1 drifts down with no jumps, but the bounded switch 0 -> 1 jumps up
  MapSpec t = two_phase(mat2(-1, 1, 1, -1));
  LevyComponent down;
  down.drift = -1.0;
  t.components[1] = down;
  t.F[0][1] = JumpLaw::uniform(0.1, 1.0);
  const auto w = ladder_irreducibility_sufficient(t);
  CHECK(w.holds);
  CHECK(w.phase_reason[1] == "Lambda2");

  MapSpec u;
  u.components = {down, down};
  u.Q = mat2(-1, 1, 1, -1);
  u.F = {{std::nullopt, JumpLaw::exponential(1.0).negate()}, {JumpLaw::point_mass(0.0), std::nullopt}};
  CHECK_FALSE(ladder_irreducibility_sufficient(u).holds);
}

TEST_CASE("jump law moments against closed forms") {
  const JumpLaw e = JumpLaw::exponential(2.0);
  CHECK(e.mean().value == doctest::Approx(0.5));
  CHECK(e.laplace(1.0) == doctest::Approx(2.0 / 3.0));
  CHECK_FALSE(e.exp_moment(2.0).finite);
  CHECK(e.integrated_tail(0.0, kInf) == doctest::Approx(0.5));

  const JumpLaw p = JumpLaw::pareto(4.0, 1.0);
  CHECK(p.mean().value == doctest::Approx(4.0 / 3.0));
  CHECK(p.abs_moment(3.0).value == doctest::Approx(4.0));
  CHECK_FALSE(p.abs_moment(4.0).finite);
  CHECK_FALSE(JumpLaw::pareto(0.5, 1.0).mean().finite);

  // generalized logistic: integrates to one, mean from digamma differences
  const JumpLaw g = JumpLaw::generalized_logistic(0.5);
  const double mass = integrate([&](double x) { return g.density(x); }, -kInf, kInf, 1e-13);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
  const double m = integrate([&](double x) { return x * g.density(x); }, -kInf, kInf, 1e-12);
  CHECK(g.mean().value == doctest::Approx(m).epsilon(1e-8));

  const JumpLaw mix = JumpLaw::mixture({0.5, 0.5}, {JumpLaw::exponential(2.0), JumpLaw::exponential(1.0).negate()});
  CHECK(mix.mean().value == doctest::Approx(0.25 - 0.5));
  CHECK(mix.cdf(0.0) == doctest::Approx(0.5));
}

TEST_CASE("spec JSON round trip") {
  MapSpec s = two_phase(mat2(-2, 2, 1, -1));
  s.F[0][1] = JumpLaw::mixture({0.3, 0.7}, {JumpLaw::point_mass(0.5), JumpLaw::exponential(1.0).negate()});
  const MapSpec back = map_spec_from_json(nlohmann::json::parse(to_json(s).dump()));
  CHECK(approx_equal(back, s, 0.0));

  LadderSpec l;
  l.drift = {1.0, 0.5};
  l.killing = {0.0, 0.1};
  l.jumps = {CompoundPoisson{1.0, JumpLaw::exponential(2.0)}, std::nullopt};
  l.Q = mat2(-1, 1, 1, -1);
  l.F = {{std::nullopt, JumpLaw::exponential(1.0)}, {std::nullopt, std::nullopt}};
  const LadderSpec lb = ladder_spec_from_json(to_json(l));
  CHECK(lb.drift == l.drift);
  CHECK(lb.killing == l.killing);
  CHECK(lb.jumps[0]->law.approx_equal(l.jumps[0]->law, 0.0));
  CHECK_FALSE(lb.jumps[1].has_value());
  CHECK(validate(lb).ok);
}
