#include "mapfluct/simulator.hpp"

#include <algorithm>
#include <cmath>

namespace mapfluct {

double MapPath::value_at(double t) const {
  if (pieces.empty()) return 0.0;
  // last piece with t0 <= t, preferring the later piece at a shared boundary
  auto it = std::upper_bound(pieces.begin(), pieces.end(), t, [](double v, const PathPiece& p) { return v < p.t0; });
  if (it == pieces.begin()) return pieces.front().x0;
  const PathPiece& p = *(it - 1);
  if (t >= p.t1) return p.x1;
  const double span = p.t1 - p.t0;
  if (span <= 0.0) return p.x0;
  return p.x0 + (p.x1 - p.x0) * ((t - p.t0) / span);
}

int MapPath::phase_at(double t) const {
  if (pieces.empty()) return 0;
  auto it = std::upper_bound(pieces.begin(), pieces.end(), t, [](double v, const PathPiece& p) { return v < p.t0; });
  if (it == pieces.begin()) return pieces.front().phase;
  return (it - 1)->phase;
}

std::vector<double> MapPath::occupation(int n) const {
  std::vector<CompensatedSum> acc(static_cast<std::size_t>(n));
  for (const auto& p : pieces) acc[static_cast<std::size_t>(p.phase)].add(p.t1 - p.t0);
  std::vector<double> out;
  for (auto& a : acc) out.push_back(a.value());
  return out;
}

MapPath simulate_path(const WalkerModel& model, double T, Rng& rng, double x0, int phase0, double grid_dt) {
  if (!std::isfinite(T) || T < 0.0) throw SpecError("horizon must be finite and >= 0");
  MapPath path;
  path.horizon = T;
  Walker w(model, x0, phase0, rng, grid_dt);
  if (T == 0.0) {
    path.pieces.push_back({0.0, 0.0, x0, x0, phase0, false});
    return path;
  }
  while (w.alive() && w.time() < T) {
    const Step s = w.next(T);
    // zero-length pieces carry no motion; the jump shows up as a gap
    if (s.t1 > s.t0 || path.pieces.empty()) path.pieces.push_back({s.t0, s.t1, s.x0, s.x1_pre, s.phase, s.diffusive});
    if (s.kind == StepKind::Switch) path.switches.push_back({s.t1, s.phase, s.phase_after, s.jump});
    if (s.kind == StepKind::Kill) path.killed = true;
  }
  // keep the end state when the last recorded piece precedes a jump
  if (!path.killed) {
    const auto& last = path.pieces.back();
    if (last.x1 != w.value() || last.phase != w.phase())
      path.pieces.push_back({w.time(), w.time(), w.value(), w.value(), w.phase(), false});
  }
  return path;
}

MapPath simulate_path(const MapSpec& spec, double T, Rng& rng, const SimOptions& opt) {
  const WalkerModel m = WalkerModel::from_map(spec, opt.eps, opt.gaussian_refinement);
  return simulate_path(m, T, rng, 0.0, 0, opt.grid_dt);
}

PassageScanner::PassageScanner(const std::vector<double>& levels, double x0, int phase0) {
  if (!std::is_sorted(levels.begin(), levels.end())) throw SpecError("levels must be sorted ascending");
  for (double l : levels) {
    OvershootSample s;
    s.level = l;
    out_.push_back(s);
  }
  // levels already below the start are passed at time 0
  while (next_ < out_.size() && x0 > out_[next_].level) {
    auto& o = out_[next_++];
    o.time = 0.0;
    o.overshoot = x0 - o.level;
    o.phase = phase0;
  }
}

void PassageScanner::feed(const Step& s) {
  // continuous crossing inside the piece
  while (next_ < out_.size() && s.piece_max > out_[next_].level) {
    auto& o = out_[next_++];
    const double rise = s.piece_max - s.x0;
    double frac = rise > 0.0 ? (o.level - s.x0) / rise : 0.0;
    if (!s.diffusive && s.x1_pre > s.x0) frac = (o.level - s.x0) / (s.x1_pre - s.x0);
    frac = std::clamp(frac, 0.0, 1.0);
    o.time = s.t0 + frac * (s.t1 - s.t0);
    o.overshoot = 0.0;
    o.phase = s.phase;
    o.crept = true;
  }
  if (s.kind == StepKind::Jump || s.kind == StepKind::Switch) {
    const double x1 = s.x1();
    while (next_ < out_.size() && x1 > out_[next_].level) {
      auto& o = out_[next_++];
      o.time = s.t1;
      o.overshoot = x1 - o.level;
      o.phase = s.phase_after;
    }
  }
}

void PassageScanner::finish(bool killed) {
  for (; next_ < out_.size(); ++next_) {
    if (killed)
      out_[next_].killed = true;
    else
      out_[next_].censored = true;
  }
}

std::vector<OvershootSample> overshoot_series(const WalkerModel& model, const std::vector<double>& levels, Rng& rng,
                                              double max_horizon, double x0, int phase0, double grid_dt) {
  PassageScanner scan(levels, x0, phase0);
  Walker w(model, x0, phase0, rng, grid_dt);
  while (!scan.done() && w.alive() && w.time() < max_horizon) scan.feed(w.next(max_horizon));
  scan.finish(!w.alive());
  return scan.samples();
}

OvershootSample first_passage(const MapSpec& spec, double level, Rng& rng, double max_horizon, const SimOptions& opt,
                              double x0, int phase0) {
  const WalkerModel m = WalkerModel::from_map(spec, opt.eps, opt.gaussian_refinement);
  return overshoot_series(m, {level}, rng, max_horizon, x0, phase0, opt.grid_dt).front();
}

void walk_sawtooth(const WalkerModel& model, double x0, int phase0, double max_level, Rng& rng,
                   const SawtoothVisitor& v, double max_horizon) {
  if (x0 > 0.0) v.ramp(0.0, x0, phase0);
  Walker w(model, x0, phase0, rng);
  while (w.alive() && w.value() < max_level) {
    if (w.time() >= max_horizon) throw ComputeError("subordinator stalled before reaching the level range");
    const Step s = w.next(max_horizon);
    if (s.x1_pre > s.x0) v.creep(s.x0, std::min(s.x1_pre, max_level), s.phase);
    if (s.kind == StepKind::Kill) break;
    if (s.jump > 0.0 && s.x1_pre < max_level) v.ramp(s.x1_pre, s.x1(), s.phase_after);
  }
}

}  // namespace mapfluct
