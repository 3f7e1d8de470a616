#pragma once

#include "mapfluct/walker.hpp"

#include <functional>
#include <vector>

namespace mapfluct {

// Linear motion on [t0, t1] in one phase. Consecutive pieces are contiguous
// in time; a gap in value or a phase change between them is a jump.
struct PathPiece {
  double t0 = 0.0, t1 = 0.0;
  double x0 = 0.0, x1 = 0.0;
  int phase = 0;
  bool diffusive = false;  // linear interpolation of a Gaussian grid step
};

struct SwitchEvent {
  double time = 0.0;
  int from = 0, to = 0;
  double jump = 0.0;
};

struct MapPath {
  std::vector<PathPiece> pieces;
  std::vector<SwitchEvent> switches;
  double horizon = 0.0;
  bool killed = false;

  double value_at(double t) const;  // right-continuous
  int phase_at(double t) const;
  double final_value() const { return pieces.empty() ? 0.0 : pieces.back().x1; }
  int final_phase() const { return pieces.empty() ? 0 : pieces.back().phase; }
  // time spent in each phase
  std::vector<double> occupation(int n) const;
};

struct SimOptions {
  double eps = 1e-3;        // small-jump cutoff for infinite-activity components
  bool gaussian_refinement = false;
  double grid_dt = 1e-2;    // step for Gaussian parts
};

MapPath simulate_path(const WalkerModel& model, double T, Rng& rng, double x0 = 0.0, int phase0 = 0,
                      double grid_dt = 1e-2);
MapPath simulate_path(const MapSpec& spec, double T, Rng& rng, const SimOptions& opt = {});

struct OvershootSample {
  double level = 0.0;
  double time = 0.0;   // passage time T_t
  double overshoot = 0.0;
  int phase = 0;
  bool crept = false;
  bool censored = false;  // horizon reached first
  bool killed = false;    // process killed first
  bool ok() const { return !censored && !killed; }
};

// Consumes steps of one path and records first passages above a sorted list
// of levels.
class PassageScanner {
 public:
  PassageScanner(const std::vector<double>& levels, double x0, int phase0);
  void feed(const Step& s);
  void finish(bool killed);  // marks unresolved levels
  bool done() const { return next_ >= out_.size(); }
  const std::vector<OvershootSample>& samples() const { return out_; }

 private:
  std::vector<OvershootSample> out_;
  std::size_t next_ = 0;
};

std::vector<OvershootSample> overshoot_series(const WalkerModel& model, const std::vector<double>& levels, Rng& rng,
                                              double max_horizon, double x0 = 0.0, int phase0 = 0,
                                              double grid_dt = 1e-2);
OvershootSample first_passage(const MapSpec& spec, double level, Rng& rng, double max_horizon,
                              const SimOptions& opt = {}, double x0 = 0.0, int phase0 = 0);

// Sawtooth view of an increasing path: level t in a creep piece has
// overshoot 0; a jump from h to h + J in phase j gives overshoot h + J - t
// for t in [h, h + J).
struct SawtoothVisitor {
  std::function<void(double a, double b, int phase)> creep;
  std::function<void(double a, double b, int phase)> ramp;  // overshoot b - t on [a, b)
};

// Walks an increasing path from (x0, phase0) until it is killed or passes
// max_level; x0 > 0 contributes an initial ramp on [0, x0).
void walk_sawtooth(const WalkerModel& model, double x0, int phase0, double max_level, Rng& rng,
                   const SawtoothVisitor& v, double max_horizon = 1e9);

}  // namespace mapfluct
