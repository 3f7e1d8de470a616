#pragma once

#include "mapfluct/numerics.hpp"

#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace mapfluct {

class Rng;

struct Interval {
  double lo, hi;
};

// A probability law on the real line, used for compound Poisson jump sizes
// and for transitional jumps at modulator switches. Immutable; copies share
// the parameter block.
class JumpLaw {
 public:
  enum class Kind {
    Exponential,       // rate mu
    Pareto,            // index a, scale x_m
    PointMass,         // location
    Uniform,           // lo, hi
    Negated,           // law of -X for an inner law
    GenLogistic,       // density a e^x / (1+e^x)^(a+1)
    Histogram,         // piecewise uniform bins + atom at 0 + overflow atom
    TruncatedAbove,    // inner conditioned on X <= cutoff
    TruncatedBelow,    // inner conditioned on X > cutoff
    Mixture
  };

  static JumpLaw exponential(double rate);
  static JumpLaw pareto(double index, double scale);
  static JumpLaw point_mass(double location);
  static JumpLaw uniform(double lo, double hi);
  static JumpLaw generalized_logistic(double alpha);
  // weights are probabilities of the bins; atom_zero sits exactly at 0 and
  // the overflow mass is placed as an atom at overflow_at.
  static JumpLaw histogram(std::vector<double> edges, std::vector<double> weights, double atom_zero = 0.0,
                           double overflow = 0.0, double overflow_at = 0.0);
  static JumpLaw truncated_above(const JumpLaw& inner, double cutoff);
  static JumpLaw truncated_below(const JumpLaw& inner, double cutoff);
  static JumpLaw mixture(std::vector<double> weights, std::vector<JumpLaw> laws);

  // Law of -X. Negating twice returns the original object.
  JumpLaw negate() const;

  Kind kind() const;
  const std::vector<double>& params() const;
  const std::vector<JumpLaw>& children() const;
  const std::vector<double>& edges() const;
  const std::vector<double>& weights() const;

  double cdf(double x) const;        // P(X <= x)
  double cdf_below(double x) const;  // P(X < x)
  double tail(double y) const { return 1.0 - cdf(y); }  // P(X > y)
  double prob_in(double lo, double hi) const { return cdf(hi) - cdf(lo); }  // P(lo < X <= hi)
  double density(double x) const;    // absolutely continuous part
  std::vector<std::pair<double, double>> atoms() const;  // (location, mass)
  std::vector<Interval> density_support() const;        // where the a.c. part has positive density
  double support_lo() const;
  double support_hi() const;
  bool has_positive_mass_above(double y) const { return tail(y) > 0.0; }

  double sample(Rng& rng) const;
  // Sample from x P(dx) / E[X]; only for laws on [0, inf) with finite mean.
  double sample_size_biased(Rng& rng) const;

  Moment mean() const;
  Moment exp_moment(double s) const;  // E exp(s X)
  Moment abs_moment(double p) const;  // E |X|^p, p >= 0
  // E exp(-s X); throws when infinite.
  double laplace(double s) const;
  std::complex<double> char_fn(double theta) const;  // E exp(i theta X)

  // E g(X) by quadrature over the continuous part plus the atoms.
  // Extra breakpoints help with kinks of g.
  double expect(const std::function<double(double)>& g, const std::vector<double>& kinks = {}) const;
  // Integral of the tail P(X > y) over [a, b]; b may be infinite.
  double integrated_tail(double a, double b) const;

  std::string describe() const;
  nlohmann::json to_json() const;
  static JumpLaw from_json(const nlohmann::json& j);

  // Structural equality up to tol on every parameter.
  bool approx_equal(const JumpLaw& other, double tol) const;

  struct Data;

 private:
  explicit JumpLaw(std::shared_ptr<const Data> d) : d_(std::move(d)) {}
  std::shared_ptr<const Data> d_;
};

}  // namespace mapfluct
