#include "mapfluct/walker.hpp"

#include <cmath>

namespace mapfluct {

namespace {

void fill_switches(PhaseDynamics& p, const Eigen::MatrixXd& Q, const LawGrid& F, int i) {
  const int n = static_cast<int>(Q.rows());
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    if (j == i || Q(i, j) <= 0.0) continue;
    acc += Q(i, j);
    p.targets.push_back(j);
    p.target_cum.push_back(acc);
    p.target_laws.push_back(F[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
  }
  p.switch_rate = acc;
  for (auto& c : p.target_cum) c /= acc;
}

}  // namespace

WalkerModel WalkerModel::from_map(const MapSpec& spec, double eps, bool gaussian_refinement) {
  auto rep = validate(spec);
  if (!rep.ok) throw SpecError("invalid map spec: " + rep.summary());
  WalkerModel m;
  for (int i = 0; i < spec.n(); ++i) {
    const auto& c = spec.components[static_cast<std::size_t>(i)];
    TruncatedLevySampler ts(c, c.finite_activity() ? 0.5 : eps, gaussian_refinement);
    PhaseDynamics p;
    p.drift = ts.drift();
    p.sigma = ts.sigma();
    p.jumps = ts.jumps();
    fill_switches(p, spec.Q, spec.F, i);
    m.phases_.push_back(std::move(p));
  }
  return m;
}

WalkerModel WalkerModel::from_ladder(const LadderSpec& spec) {
  auto rep = validate(spec);
  if (!rep.ok) throw SpecError("invalid ladder spec: " + rep.summary());
  WalkerModel m;
  for (int i = 0; i < spec.n(); ++i) {
    PhaseDynamics p;
    p.drift = spec.drift[static_cast<std::size_t>(i)];
    p.kill = spec.killing[static_cast<std::size_t>(i)];
    if (const auto& cp = spec.jumps[static_cast<std::size_t>(i)]) p.jumps = JumpSource::from_law(cp->rate, cp->law);
    fill_switches(p, spec.Q, spec.F, i);
    m.phases_.push_back(std::move(p));
  }
  return m;
}

bool WalkerModel::diffusive() const {
  for (const auto& p : phases_)
    if (p.sigma > 0.0) return true;
  return false;
}

bool WalkerModel::creeping_class() const {
  for (const auto& p : phases_)
    if (p.sigma > 0.0 || !(p.drift > 0.0)) return false;
  return true;
}

bool WalkerModel::nonpositive_class() const {
  for (const auto& p : phases_)
    if (p.sigma > 0.0 || p.drift > 0.0) return false;
  return true;
}

Walker::Walker(const WalkerModel& model, double x0, int phase0, Rng& rng, double grid_dt)
    : m_(&model), rng_(&rng), grid_dt_(grid_dt), x_(x0), phase_(phase0) {
  if (phase0 < 0 || phase0 >= model.n()) throw SpecError("start phase out of range");
}

Step Walker::next(double horizon) {
  const PhaseDynamics& P = m_->phase(phase_);
  Rng& rng = *rng_;
  const double jr = P.jumps.rate();
  const double total = jr + P.switch_rate + P.kill;
  double dt = total > 0.0 ? rng.exponential() / total : kInf;
  Step s;
  s.kind = StepKind::Jump;  // refined below
  const bool diff = P.sigma > 0.0;
  bool event = true;
  if (diff && grid_dt_ < dt) {
    dt = grid_dt_;
    s.kind = StepKind::Grid;
    event = false;
  }
  if (t_ + dt >= horizon) {
    dt = horizon - t_;
    s.kind = StepKind::Horizon;
    event = false;
  }
  s.t0 = t_;
  s.t1 = s.kind == StepKind::Horizon ? horizon : t_ + dt;
  s.x0 = x_;
  s.phase = s.phase_after = phase_;
  s.diffusive = diff;
  if (diff) {
    s.x1_pre = x_ + P.drift * dt + P.sigma * std::sqrt(dt) * rng.normal();
    // maximum of the Brownian bridge between the two endpoints
    const double d = s.x1_pre - s.x0;
    const double u = rng.uniform_pos();
    s.piece_max = 0.5 * (s.x0 + s.x1_pre + std::sqrt(d * d - 2.0 * P.sigma * P.sigma * dt * std::log(u)));
  } else {
    s.x1_pre = x_ + P.drift * dt;
    s.piece_max = std::max(s.x0, s.x1_pre);
  }
  if (event) {
    const double u = rng.uniform() * total;
    if (u < jr) {
      s.kind = StepKind::Jump;
      s.jump = P.jumps.sample(rng);
    } else if (u < jr + P.switch_rate) {
      s.kind = StepKind::Switch;
      const double v = rng.uniform();
      std::size_t k = 0;
      while (k + 1 < P.targets.size() && v >= P.target_cum[k]) ++k;
      s.phase_after = P.targets[k];
      if (P.target_laws[k]) s.jump = P.target_laws[k]->sample(rng);
    } else {
      s.kind = StepKind::Kill;
      alive_ = false;
    }
  }
  t_ = s.t1;
  x_ = s.x1();
  phase_ = s.phase_after;
  return s;
}

}  // namespace mapfluct
