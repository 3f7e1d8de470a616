#pragma once

#include "mapfluct/jump_law.hpp"

#include <complex>
#include <optional>
#include <variant>

namespace mapfluct {

struct CompoundPoisson {
  double rate = 0.0;
  JumpLaw law = JumpLaw::point_mass(0.0);
};

// Strictly stable jump density c+ x^{-a-1} on x>0, c- |x|^{-a-1} on x<0.
struct StableJumps {
  double alpha = 0.5;
  double c_plus = 0.0;
  double c_minus = 0.0;
};

// Jump density e^x pi(s (e^x - 1)) of the log-radius of a stable process
// in phase s = +1 or -1; mirrored flips x -> -x (used by the dual).
struct LampertiJumps {
  double alpha = 0.5;
  double rho = 0.5;
  int phase_sign = 1;
  bool mirrored = false;
};

using JumpPart = std::variant<std::monostate, CompoundPoisson, StableJumps, LampertiJumps>;

// Infinite-activity jump density with closed-form one-sided tails and exact
// conditional samplers beyond a cutoff.
class LevyDensity {
 public:
  explicit LevyDensity(const StableJumps& s);
  explicit LevyDensity(const LampertiJumps& l);

  double alpha() const { return alpha_; }
  double density(double x) const;
  double tail_above(double y) const;  // Pi((y, inf)), y > 0
  double tail_below(double z) const;  // Pi((-inf, -z)), z > 0
  double sample_above(double y, Rng& rng) const;
  double sample_below(double z, Rng& rng) const;  // returns the negative jump
  // integral of x over eps < |x| <= 1
  double compensator(double eps) const;
  // integral of x^2 over |x| <= eps
  double small_variance(double eps) const;
  // integral of x over |x| > 1 (tri-state)
  Moment big_jump_mean() const;
  // integral_1^inf e^{s x} Pi(dx)
  Moment exp_tail_integral(double s) const;
  // integral_1^inf x^p Pi(dx)
  Moment power_tail_integral(double p) const;
  // integral of (e^{i th x} - 1 - i th x 1{|x|<=1}) Pi(dx)
  std::complex<double> exponent(double theta) const;
  // integral over |x| >= 1 part truncated at an upper limit, for divergence probes
  double exp_tail_integral_to(double s, double upper) const;
  bool is_stable() const { return stable_; }
  double coef_plus() const { return cp_; }
  double coef_minus() const { return cm_; }

 private:
  bool stable_;
  double alpha_, cp_, cm_;
  bool mirror_ = false;
  double base_density(double x) const;
};

struct LevyComponent {
  double drift = 0.0;     // natural drift for compound Poisson, Levy-Khintchine drift otherwise
  double gaussian = 0.0;  // b >= 0, variance b^2 per unit time
  JumpPart jumps;
  double killing = 0.0;

  bool has_jumps() const { return !std::holds_alternative<std::monostate>(jumps); }
  bool finite_activity() const { return !std::holds_alternative<StableJumps>(jumps) && !std::holds_alternative<LampertiJumps>(jumps); }
  const CompoundPoisson* cpp() const { return std::get_if<CompoundPoisson>(&jumps); }
  std::optional<LevyDensity> levy_density() const;

  // E xi_1 (tri-state); infinite means undetermined for the dichotomy.
  Moment mean() const;
  // Psi(theta) = log E exp(i theta xi_1)
  std::complex<double> exponent(double theta) const;
  // sign flip x -> -x
  LevyComponent negated() const;
  bool unbounded_variation() const;
  bool positive_jumps() const;  // supp(Pi) meets (0, inf)
  // jumps above 1: exponential / power moment of the Levy measure
  Moment exp_tail(double s) const;
  Moment power_tail(double p) const;
  // intervals where Pi has positive Lebesgue density
  std::vector<Interval> jump_density_support() const;
};

// Stable asymmetry constants c+ and c- from (alpha, rho).
double stable_c_plus(double alpha, double rho);
double stable_c_minus(double alpha, double rho);

}  // namespace mapfluct
