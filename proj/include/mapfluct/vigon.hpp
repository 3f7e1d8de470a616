#pragma once

#include "mapfluct/ladder.hpp"

#include <string>
#include <vector>

namespace mapfluct {

// Levy measure of one component on (lo, hi], lo >= 0 or hi <= 0.
double levy_mass(const LevyComponent& c, double lo, double hi);

// Right-hand side of the ladder identities on the bin (lo, hi]: i == j gives
// the ladder jump measure of phase i, i != j the transitional measure
// q+_ij F+_ij, both from the parent Levy system and the dual ladder
// potential U (start phase k, target phase i). Midpoint rule over U cells.
double vigon_rhs(const MapSpec& spec, const PotentialEstimate& dual_potential, int i, int j, double lo, double hi);
// The same identities in the other orientation: the dual ladder measures from
// the dual parent and the ascending potential.
double vigon_rhs_dual(const MapSpec& spec, const PotentialEstimate& potential, int i, int j, double lo, double hi);
// One-phase Levy case, written directly: int Pi(y + (lo, hi]) U(dy).
double vigon_rhs_levy(const LevyComponent& c, const std::vector<double>& edges, const std::vector<double>& cell_mass,
                      double lo, double hi);

struct VigonOptions {
  std::size_t n_paths = 100000;      // ascending ladder paths in total
  std::size_t dual_paths = 20000;    // dual ladder paths per start phase in total
  double horizon = 20.0;             // ascending ladder path length
  double dual_depth = 40.0;          // dual epoch search depth
  double dual_horizon = 1e4;
  std::vector<double> bins;          // law bins (default 0.1 steps on [0, 4])
  std::vector<double> dual_edges;    // default: 0, 1e-9, then 0.1 steps to 15
  double fit_lo = 0.2, fit_hi = 2.0;
  int batches = 10;
  double tolerance = 0.1;
  std::uint64_t seed = 1;
  int workers = 0;
};

struct VigonRow {
  int i = 0, j = 0;
  double lo = 0.0, hi = 0.0;
  double lhs = 0.0, lhs_se = 0.0;
  double rhs = 0.0, rhs_se = 0.0;  // scaled by the fitted factor of row i
  double ratio = 0.0;              // lhs / rhs
  double residual = 0.0;           // ratio - 1
  bool significant = false;        // both sides above 3 SE
  bool in_fit = false;
};

struct VigonReport {
  std::vector<VigonRow> rows;
  std::vector<double> scale;   // per phase, multiplies the raw rhs
  double max_abs_residual = 0.0;  // over significant rows in the fit range
  std::size_t fit_rows = 0;
  bool pass = false;
  std::vector<std::vector<bool>> transitional_positive;  // lhs q+_ij > 0 (3 SE)
};

// Requires the creeping class and a Transient spec.
VigonReport vigon_check(const MapSpec& spec, const VigonOptions& opt);

struct MomentTransfer {
  std::vector<bool> holds;                       // per phase
  std::vector<std::vector<std::string>> offending;  // per phase
  bool all() const;
};
enum class MomentMode { Exponential, Polynomial };
MomentTransfer moment_transfer_check(const MapSpec& spec, double lambda, MomentMode mode);

struct ContinuityTransfer {
  std::vector<std::vector<Interval>> jump_intervals;  // per phase, on (0, inf)
  std::vector<std::vector<std::vector<Interval>>> transition_intervals;  // [k][i], on (0, inf)
  std::vector<bool> transfers;  // per phase: some interval reaches the ladder measure
  bool creeping_route = false;  // some ladder drift positive
  bool density_route = false;
};
ContinuityTransfer absolute_continuity_transfer(const MapSpec& spec);

struct WienerHopfReport {
  std::vector<double> thetas;
  std::vector<double> diag;        // fitted middle diagonal
  bool clamped = false;
  std::vector<double> residual;    // max entry residual per theta
  double max_residual = 0.0;
  double max_entry = 0.0;          // max |Psi| entry over the grid
};

// -Psi(theta) vs Dpi^{-1} dualPhi(i theta)^T Dpi M Phi(-i theta) with a fitted
// positive diagonal M that absorbs both local-time scalings.
WienerHopfReport wiener_hopf_residual(const MapSpec& spec, const LadderSpec& ladder, const LadderSpec& dual_ladder,
                                      const std::vector<double>& thetas);

}  // namespace mapfluct
