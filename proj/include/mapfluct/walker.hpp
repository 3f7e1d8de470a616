#pragma once

#include "mapfluct/map_spec.hpp"
#include "mapfluct/samplers.hpp"

#include <vector>

namespace mapfluct {

// Per-phase dynamics in event-driven form: drift and Gaussian part between
// events, and competing exponential clocks for jumps, switches and killing.
struct PhaseDynamics {
  double drift = 0.0;
  double sigma = 0.0;
  double kill = 0.0;
  double switch_rate = 0.0;
  JumpSource jumps;
  std::vector<int> targets;
  std::vector<double> target_cum;  // cumulative switch probabilities
  std::vector<std::optional<JumpLaw>> target_laws;
};

class WalkerModel {
 public:
  // Infinite-activity components are truncated at eps.
  static WalkerModel from_map(const MapSpec& spec, double eps = 1e-3, bool gaussian_refinement = false);
  static WalkerModel from_ladder(const LadderSpec& spec);

  int n() const { return static_cast<int>(phases_.size()); }
  const PhaseDynamics& phase(int i) const { return phases_[static_cast<std::size_t>(i)]; }
  bool diffusive() const;
  // every phase moves up linearly with no Gaussian part
  bool creeping_class() const;
  // every phase has drift <= 0 and no Gaussian part
  bool nonpositive_class() const;

 private:
  std::vector<PhaseDynamics> phases_;
};

enum class StepKind { Jump, Switch, Kill, Grid, Horizon };

// One piece of path: continuous motion on [t0, t1] from x0 to x1_pre, then
// the event at t1 (jump or switch with its transitional jump).
struct Step {
  StepKind kind = StepKind::Horizon;
  double t0 = 0.0, t1 = 0.0;
  double x0 = 0.0, x1_pre = 0.0;
  double jump = 0.0;
  double piece_max = 0.0;  // exact for linear pieces, sampled bridge maximum otherwise
  int phase = 0, phase_after = 0;
  bool diffusive = false;
  double x1() const { return x1_pre + jump; }
};

class Walker {
 public:
  Walker(const WalkerModel& model, double x0, int phase0, Rng& rng, double grid_dt = 1e-2);
  // Advances to the next event, grid point or the horizon.
  Step next(double horizon);
  double time() const { return t_; }
  double value() const { return x_; }
  int phase() const { return phase_; }
  bool alive() const { return alive_; }

 private:
  const WalkerModel* m_;
  Rng* rng_;
  double grid_dt_;
  double t_ = 0.0, x_ = 0.0;
  int phase_ = 0;
  bool alive_ = true;
};

}  // namespace mapfluct
