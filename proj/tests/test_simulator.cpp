#include "mapfluct/ladder.hpp"
#include "mapfluct/lamperti.hpp"
#include "mapfluct/simulator.hpp"
#include "mapfluct/stationary.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace mapfluct;

namespace {

Eigen::MatrixXd mat2(double a, double b, double c, double d) {
  Eigen::MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

LevyComponent drift_comp(double a) {
  LevyComponent c;
  c.drift = a;
  return c;
}

MapSpec one_phase(const LevyComponent& c) {
  MapSpec s;
  s.components = {c};
  s.Q = Eigen::MatrixXd::Zero(1, 1);
  s.F.assign(1, std::vector<std::optional<JumpLaw>>(1));
  return s;
}

MapSpec two_drift(double a, double b, const Eigen::MatrixXd& Q) {
  MapSpec s;
  s.components = {drift_comp(a), drift_comp(b)};
  s.Q = Q;
  s.F.assign(2, std::vector<std::optional<JumpLaw>>(2));
  return s;
}

LadderSpec ladder_two_phase() {
  LadderSpec l;
  l.drift = {1.0, 0.5};
  l.killing = {0.0, 0.0};
  l.jumps = {CompoundPoisson{1.0, JumpLaw::exponential(2.0)}, CompoundPoisson{2.0, JumpLaw::exponential(3.0)}};
  l.Q = mat2(-1, 1, 1, -1);
  l.F = {{std::nullopt, JumpLaw::exponential(1.0)}, {JumpLaw::exponential(1.0), std::nullopt}};
  return l;
}

}  // namespace

TEST_CASE("path simulation") {
  Rng rng(1, 0);
  const MapPath p = simulate_path(one_phase(drift_comp(2.0)), 7.5, rng);
  CHECK(p.final_value() == doctest::Approx(15.0).epsilon(1e-14));

  // alternating renewal: switches over T = 100 average 100 * 2 q01 q10 / (q01 + q10)
  const MapSpec s = two_drift(1.0, -1.0, mat2(-1, 1, 3, -3));
  const double expected = 100.0 * 2.0 * 1.0 * 3.0 / 4.0;
  double sum = 0, sum2 = 0;
  const int n = 10000;
  for (int k = 0; k < n; ++k) {
    Rng r(2, static_cast<std::uint64_t>(k));
    const double c = static_cast<double>(simulate_path(s, 100.0, r).switches.size());
    sum += c;
    sum2 += c * c;
  }
  const double mean = sum / n, se = std::sqrt((sum2 / n - mean * mean) / n);
  CHECK(std::abs(mean - expected) <= 3.0 * se);

  // fast modulator so one path of length 1000 resolves 0.01
  const MapSpec fast = two_drift(1.0, -1.0, mat2(-20, 20, 40, -40));
  Rng r(3, 0);
  const MapPath longp = simulate_path(fast, 1000.0, r);
  const auto occ = longp.occupation(2);
  CHECK(std::abs(occ[0] / 1000.0 - 2.0 / 3.0) <= 0.01);
  CHECK(occ[0] + occ[1] == doctest::Approx(1000.0));
}

TEST_CASE("occupation of a long path matches the modulator law") {
  const MapSpec s = two_drift(1.0, -1.0, mat2(-2, 2, 1, -1));
  Rng r(4, 0);
  const MapPath p = simulate_path(s, 1e5, r);
  const auto occ = p.occupation(2);
  CHECK(std::abs(occ[0] / 1e5 - 1.0 / 3.0) <= 0.01);
}

TEST_CASE("first passage") {
  Rng rng(1, 0);
  const auto fp = first_passage(one_phase(drift_comp(2.0)), 5.0, rng, 100.0);
  CHECK(fp.time == doctest::Approx(2.5));
  CHECK(fp.overshoot == 0.0);
  CHECK(fp.crept);

  // exponential jumps forget their past: O_t ~ Exp(mu)
  LevyComponent cpp;
  cpp.jumps = CompoundPoisson{1.0, JumpLaw::exponential(1.5)};
  const MapSpec s = one_phase(cpp);
  const int n = 100000;
  std::vector<double> o;
  o.reserve(n);
  for (int k = 0; k < n; ++k) {
    Rng r(5, static_cast<std::uint64_t>(k));
    const auto x = first_passage(s, 3.0, r, 1e4);
    REQUIRE(x.ok());
    CHECK_FALSE(x.crept);
    o.push_back(x.overshoot);
  }
  std::sort(o.begin(), o.end());
  double ks = 0.0;
  for (int k = 0; k < n; ++k) {
    const double F = -std::expm1(-1.5 * o[k]);
    ks = std::max({ks, std::abs(F - k / static_cast<double>(n)), std::abs(F - (k + 1) / static_cast<double>(n))});
  }
  CHECK(ks < 0.01);

  // creeping is seen in every phase with positive drift
  MapSpec two;
  LevyComponent a = drift_comp(1.0), b = drift_comp(0.5);
  a.jumps = CompoundPoisson{1.0, JumpLaw::exponential(2.0)};
  b.jumps = CompoundPoisson{2.0, JumpLaw::exponential(3.0)};
  two.components = {a, b};
  two.Q = mat2(-1, 1, 1, -1);
  two.F.assign(2, std::vector<std::optional<JumpLaw>>(2));
  int crept[2] = {0, 0};
  for (int k = 0; k < 2000; ++k) {
    Rng r(6, static_cast<std::uint64_t>(k));
    const auto x = first_passage(two, 10.0, r, 1e4);
    if (x.crept) crept[x.phase] += 1;
  }
  CHECK(crept[0] > 0);
  CHECK(crept[1] > 0);
}

TEST_CASE("sawtooth identity on one path") {
  LevyComponent c = drift_comp(0.2);
  c.jumps = CompoundPoisson{1.0, JumpLaw::uniform(0.2, 2.0)};
  const WalkerModel m = WalkerModel::from_map(one_phase(c));
  for (int k = 0; k < 200; ++k) {
    Rng r(7, static_cast<std::uint64_t>(k));
    const auto s = overshoot_series(m, {1.0, 1.3}, r, 1e4);
    REQUIRE(s.size() == 2);
    CHECK(s[0].time <= s[1].time);
    // both levels passed by the same jump
    if (s[0].overshoot >= 0.3) {
      CHECK(s[1].time == s[0].time);
      CHECK(s[1].overshoot == doctest::Approx(s[0].overshoot - 0.3).epsilon(1e-12));
    }
  }
  // start above the level
  Rng r(8, 0);
  const auto above = overshoot_series(m, {1.0}, r, 1e4, 2.5);
  CHECK(above[0].overshoot == doctest::Approx(1.5));
  CHECK(above[0].time == 0.0);
}

TEST_CASE("ladder statistics") {
  Rng r(1, 0);
  const MapPath p = simulate_path(one_phase(drift_comp(1.0)), 12.0, r);
  const LadderStats st = extract_ladder_stats(p, 1);
  CHECK(st.time_at_max[0] == doctest::Approx(12.0));
  CHECK(st.jumps[0].empty());

  // a parent with no upward jumps gives no ladder jumps
  MapSpec neg;
  LevyComponent a = drift_comp(1.0), b = drift_comp(0.8);
  a.jumps = CompoundPoisson{1.0, JumpLaw::exponential(1.0).negate()};
  b.jumps = CompoundPoisson{1.0, JumpLaw::exponential(2.0).negate()};
  neg.components = {a, b};
  neg.Q = mat2(-1, 1, 1, -1);
  neg.F.assign(2, std::vector<std::optional<JumpLaw>>(2));
  LadderEstimateOptions o;
  o.n_paths = 500;
  o.horizon = 20.0;
  o.bins = {0.0, 0.5, 1.0, 2.0};
  const auto est = estimate_ladder_spec(neg, o);
  for (int i = 0; i < 2; ++i)
    for (double m : est.jump_measure[i].mass) CHECK(m == 0.0);
}

TEST_CASE("ladder overshoot") {
  LadderSpec drift;
  drift.drift = {1.0};
  drift.killing = {0.0};
  drift.jumps = {std::nullopt};
  drift.Q = Eigen::MatrixXd::Zero(1, 1);
  drift.F.assign(1, std::vector<std::optional<JumpLaw>>(1));
  Rng r0(1, 0);
  for (const auto& s : simulate_ladder_overshoot(drift, {0.0, 1.0, 7.0}, r0)) CHECK(s.overshoot == 0.0);

  // creeping atom d / (d + c/mu) = 2/3
  LadderSpec l = drift;
  l.jumps = {CompoundPoisson{1.0, JumpLaw::exponential(2.0)}};
  const int n = 100000;
  int zero = 0;
  for (int k = 0; k < n; ++k) {
    Rng r(2, static_cast<std::uint64_t>(k));
    const auto s = simulate_ladder_overshoot(l, {50.0}, r);
    zero += s[0].overshoot == 0.0 ? 1 : 0;
  }
  CHECK(std::abs(zero / static_cast<double>(n) - 2.0 / 3.0) <= 0.01);
}

TEST_CASE("potential measure") {
  LadderSpec drift;
  drift.drift = {1.0};
  drift.killing = {0.0};
  drift.jumps = {std::nullopt};
  drift.Q = Eigen::MatrixXd::Zero(1, 1);
  drift.F.assign(1, std::vector<std::optional<JumpLaw>>(1));
  PotentialOptions po;
  po.n_paths = 100;
  const auto U = estimate_potential_measure(drift, {0.0, 1.0, 2.5, 4.0}, po);
  CHECK(U.cum[0][0][2] == doctest::Approx(2.5).epsilon(1e-12));

  // renewal rate: U_jj(z)/z -> pi(j) / E[H_1]
  const LadderSpec l = ladder_two_phase();
  std::vector<double> edges;
  for (int k = 0; k <= 60; ++k) edges.push_back(k * 1.0);
  po.n_paths = 4000;
  const auto V = estimate_potential_measure(l, edges, po);
  const InvariantMeasure chi(l);
  for (int j = 0; j < 2; ++j) {
    const double slope = (V.cum[j][j][60] - V.cum[j][j][30]) / 30.0;
    CHECK(slope == doctest::Approx(chi.pi()(j) / chi.mass()).epsilon(0.05));
  }
}

TEST_CASE("Lamperti transform examples") {
  // Z = e^s with alpha = 0: xi_t = t, phase +1
  std::vector<double> ts, vs;
  for (int k = 0; k <= 1000; ++k) {
    ts.push_back(k * 0.001);
    vs.push_back(1.0);
  }
  const RealPath one = real_path_from_grid(ts, vs, 0.0);
  const MapPath f = lamperti_kiu_forward(one, 0.0);
  for (const auto& p : f.pieces) {
    CHECK(p.phase == 0);
    CHECK(p.x0 == 0.0);
  }

  // xi_t = t, alpha = 1: Z_t = 1 + t
  MapPath up;
  up.pieces.push_back({0.0, 3.0, 0.0, 3.0, 0, false});
  up.horizon = 3.0;
  const RealPath z = lamperti_kiu_inverse(up, 1.0);
  for (double t : {0.0, 0.5, 2.0, std::exp(3.0) - 1.0 - 1e-9}) CHECK(z.value_at(t) == doctest::Approx(1.0 + t).epsilon(1e-12));

  vs[500] = 0.0;
  CHECK_THROWS_WITH_AS(real_path_from_grid(ts, vs, 0.5), doctest::Contains("absorbed"), ComputeError);

  for (int k = 0; k < 20; ++k) {
    Rng r(3, static_cast<std::uint64_t>(k));
    CHECK(lamperti_round_trip_error(random_map_path(r, 10), 0.5) <= 1e-9);
  }
}
