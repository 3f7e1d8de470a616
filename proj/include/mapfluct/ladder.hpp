#pragma once

#include "mapfluct/simulator.hpp"

#include <vector>

namespace mapfluct {

struct LadderTransition {
  int from = 0, to = 0;
  double size = 0.0;  // may be 0: phase change at the maximum without a gain
};

// Ladder statistics of one or more paths in the creeping class. Local time
// at the maximum is measured by the height gained through creeping, so the
// ladder drift is 1 in every phase.
struct LadderStats {
  std::vector<double> time_at_max;   // per phase
  std::vector<double> local_time;    // creep height per phase
  std::vector<std::vector<double>> jumps;  // ladder jump sizes per phase
  std::vector<LadderTransition> transitions;
  std::vector<std::vector<long>> switch_counts;  // [from][to]

  explicit LadderStats(int n = 0);
  int n() const { return static_cast<int>(time_at_max.size()); }
  void merge(const LadderStats& o);
};

// Streaming maximum tracker for the creeping class.
class CreepingLadderTracker {
 public:
  CreepingLadderTracker(LadderStats& out, double x0, int phase0);
  void piece(double t0, double t1, double x0, double x1, int phase);
  void jump(double x_before, double x_after, int phase_before, int phase_after);
  void step(const Step& s);

 private:
  LadderStats* out_;
  double max_;
  int max_phase_;
  bool at_max_ = true;
};

LadderStats extract_ladder_stats(const MapPath& path, int n);

struct BinnedMeasure {
  std::vector<double> edges;
  std::vector<double> mass;  // per bin, per unit local time
  std::vector<double> se;
  double atom_zero = 0.0, atom_zero_se = 0.0;
  double overflow = 0.0;
};

struct LadderEstimate {
  LadderSpec spec;  // drift 1, histogram laws
  LadderStats stats;
  std::vector<BinnedMeasure> jump_measure;               // Pi+_i on the bin grid
  std::vector<std::vector<BinnedMeasure>> transition_measure;  // q+_ij F+_ij
  Eigen::MatrixXd q_se;
  std::vector<long> ladder_events;  // per phase
  bool low_count_warning = false;
};

struct LadderEstimateOptions {
  std::size_t n_paths = 10000;
  double horizon = 50.0;
  std::vector<double> bins;  // bin edges for the laws, from 0
  long min_events = 50;
  int start_phase = -1;      // -1: spread starts over phases in proportion to pi
  std::uint64_t seed = 1;
  int workers = 0;
  SimOptions sim;
};

LadderEstimate estimate_ladder_spec(const MapSpec& spec, const LadderEstimateOptions& opt);

// Ladder epochs of a path with no upward creeping: the chain of successive
// new maxima (H_n, J_n), counting local time.
struct EpochPath {
  std::vector<double> height;  // relative to the start, height[0] = 0
  std::vector<int> phase;
  bool killed = false;    // fell below the censoring depth after the last epoch
  bool censored = false;  // horizon reached
};

EpochPath simulate_epochs(const WalkerModel& model, int phase0, double depth, double horizon, Rng& rng);

// Ladder estimate for the no-creeping class in counting local time: each
// epoch is one unit; killing is the chance of no further epoch.
struct EpochLadderEstimate {
  LadderSpec spec;
  std::vector<long> steps;  // observed steps per phase
  std::vector<long> censored;
};

struct EpochOptions {
  std::size_t n_paths = 10000;
  double depth = 40.0;
  double horizon = 1e4;
  std::vector<double> bins;
  std::uint64_t seed = 1;
  int workers = 0;
  SimOptions sim;
};

EpochLadderEstimate estimate_epoch_ladder(const MapSpec& spec, const EpochOptions& opt);

// Occupation measure U+_{ij} on grid cells, with per-start covariance of the
// cumulative vectors so differences get exact standard errors.
struct PotentialEstimate {
  int n = 0;
  std::vector<double> edges;
  // cum[i][j][k] = U_{ij}([edges[0], edges[k]]), k = 0..K
  std::vector<std::vector<std::vector<double>>> cum;
  // cov[i] over the stacked vector (j, k) for start phase i; diagonal only
  // when the full matrix was not requested
  std::vector<Eigen::MatrixXd> cov;
  std::vector<std::size_t> paths;  // per start phase

  double cell(int i, int j, std::size_t k) const { return cum[i][j][k + 1] - cum[i][j][k]; }
  std::size_t index(int j, std::size_t k) const { return static_cast<std::size_t>(j) * edges.size() + k; }
  // standard error of sum_t w_t * cum[i][j_t][k_t] for one start phase
  double se_of(int i, const std::vector<std::pair<std::size_t, double>>& weights) const;
  double cum_at(int i, int j, double x) const;  // linear interpolation
};

struct PotentialOptions {
  std::size_t n_paths = 10000;  // per start phase
  std::uint64_t seed = 1;
  int workers = 0;
  bool covariance = true;  // full covariance; otherwise only variances
};

PotentialEstimate estimate_potential_measure(const LadderSpec& ladder, const std::vector<double>& edges,
                                             const PotentialOptions& opt);
// Counting-local-time potential of the ladder epochs of a MapSpec in the
// no-creeping class (used for the dual in the Vigon check).
PotentialEstimate estimate_epoch_potential(const MapSpec& spec, const std::vector<double>& edges,
                                           const EpochOptions& opt);

std::vector<OvershootSample> simulate_ladder_overshoot(const LadderSpec& ladder, const std::vector<double>& levels,
                                                       Rng& rng, double x0 = 0.0, int phase0 = 0);

}  // namespace mapfluct
