#pragma once

#include "mapfluct/levy_component.hpp"
#include "mapfluct/rng.hpp"

#include <utility>
#include <vector>

namespace mapfluct {

struct EventList {
  std::vector<std::pair<double, double>> events;  // (time, jump size), times increasing in (0, T]
  double horizon = 0.0;
  double total() const {
    double s = 0.0;
    for (const auto& e : events) s += e.second;
    return s;
  }
};

EventList sample_cpp_events(double rate, const JumpLaw& law, double T, Rng& rng);

// Normal(a dt, b^2 dt); exactly a*dt when b = 0.
double sample_brownian_increment(double a, double b, double dt, Rng& rng);

// Strictly stable increment over time dt with density coefficients c+, c-
// (Chambers-Mallows-Stuck). alpha = 1 only in the symmetric case.
double sample_stable(double alpha, double c_plus, double c_minus, double dt, Rng& rng);
// Same law in the (alpha, positivity) parametrization.
double sample_stable_increment(double alpha, double rho, double dt, Rng& rng);

// Exact increment of a finite-activity component over dt.
double sample_exact_increment(const LevyComponent& c, double dt, Rng& rng);

// Jumps of size |x| > eps of a component, as a finite-rate source.
class JumpSource {
 public:
  JumpSource() = default;
  static JumpSource from_component(const LevyComponent& c, double eps);
  static JumpSource from_law(double rate, const JumpLaw& law);
  double rate() const { return rate_; }
  double sample(Rng& rng) const;

 private:
  double rate_ = 0.0;
  std::optional<JumpLaw> law_;
  std::optional<LevyDensity> dens_;
  double eps_ = 0.0;
  double p_up_ = 0.0;
};

// Drift + Gaussian + compound Poisson of jumps with |x| > eps. The drift is
// corrected by the mean of removed jumps in eps < |x| <= 1; optionally the
// removed small jumps are replaced by a Gaussian of matching variance.
class TruncatedLevySampler {
 public:
  TruncatedLevySampler(const LevyComponent& c, double eps, bool gaussian_refinement = false);
  double drift() const { return drift_; }
  double sigma() const { return sigma_; }
  const JumpSource& jumps() const { return jumps_; }
  double sample_increment(double dt, Rng& rng) const;

 private:
  LevyComponent comp_;
  bool exact_ = false;
  double drift_ = 0.0, sigma_ = 0.0;
  JumpSource jumps_;
};

// Increments for several cutoffs driven by the same jumps: the finest
// cutoff's jumps are drawn once and coarser levels discard the small ones.
std::vector<double> coupled_truncated_increments(const LevyComponent& c, const std::vector<double>& eps_levels, double dt,
                                                 Rng& rng);

}  // namespace mapfluct
