#pragma once

#include "mapfluct/ladder.hpp"
#include "mapfluct/rng.hpp"

#include <vector>

namespace mapfluct {

// Law of (O, J) on a grid: an atom at 0 per phase plus masses on left-closed
// bins [e_k, e_{k+1}) per phase. Bins above the last edge are lumped into
// an overflow mass per phase.
struct OvershootLawEval {
  std::vector<double> edges;
  std::vector<double> atoms;                  // per phase
  std::vector<std::vector<double>> bins;      // [phase][bin]
  std::vector<double> overflow;               // per phase
  double total = 1.0;                         // stated total mass
  int n() const { return static_cast<int>(atoms.size()); }
  double mass() const;                        // atoms + bins + overflow
};

// chi: atom pi+(i) d_i at 0, density pi+(i) c_i P(X_i > y) + sum_j pi+(j) q_ji P(D_ji > y).
class InvariantMeasure {
 public:
  explicit InvariantMeasure(const LadderSpec& ladder);
  int n() const { return ladder_.n(); }
  const Eigen::VectorXd& pi() const { return pi_; }
  double atom(int i) const;
  double density(double y, int i) const;
  // closed-form total mass E^{0,pi+}[H_1]; infinite when some mean is
  bool finite_mass() const { return finite_; }
  double mass() const { return mass_; }
  // mass by quadrature of the density plus atoms
  double mass_by_quadrature() const;
  // exact bin masses from integrated tails
  OvershootLawEval discretize(const std::vector<double>& edges, bool normalized) const;
  // sample from the normalized measure
  std::pair<double, int> sample(Rng& rng) const;

 private:
  LadderSpec ladder_;
  Eigen::VectorXd pi_;
  bool finite_ = true;
  double mass_ = 0.0;
  // components for sampling: type 0 atom, 1 jump, 2 transition
  struct Part {
    int type, from, to;
    double weight;
  };
  std::vector<Part> parts_;
  std::vector<double> cum_;
};

InvariantMeasure invariant_measure(const LadderSpec& ladder);
// normalized rho on a grid; throws "no stationary distribution" for infinite mean
OvershootLawEval stationary_distribution(const LadderSpec& ladder, const std::vector<double>& edges);

// Law of (O_t, J_t) from (x, i) by convolving the potential estimate with
// the ladder jump laws; includes the creeping atom d_j u_ij(t - x).
OvershootLawEval overshoot_marginal(const LadderSpec& ladder, const PotentialEstimate& U, double x, int i, double t,
                                    const std::vector<double>& edges);

}  // namespace mapfluct
