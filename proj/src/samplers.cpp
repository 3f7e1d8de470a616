#include "mapfluct/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace mapfluct {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

EventList sample_cpp_events(double rate, const JumpLaw& law, double T, Rng& rng) {
  EventList out;
  out.horizon = T;
  if (!(T > 0.0) || !(rate > 0.0)) return out;
  std::poisson_distribution<long> pois(rate * T);
  const long n = pois(rng);
  std::vector<double> times(static_cast<std::size_t>(n));
  for (auto& t : times) t = T * (1.0 - rng.uniform());  // in (0, T]
  std::sort(times.begin(), times.end());
  out.events.reserve(times.size());
  for (double t : times) out.events.push_back({t, law.sample(rng)});
  return out;
}

double sample_brownian_increment(double a, double b, double dt, Rng& rng) {
  if (dt <= 0.0) return 0.0;
  if (b == 0.0) return a * dt;
  return a * dt + b * std::sqrt(dt) * rng.normal();
}

double sample_stable(double alpha, double c_plus, double c_minus, double dt, Rng& rng) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw SpecError("stable index must lie in (0,2)");
  if (dt <= 0.0) return 0.0;
  const double V = kPi * (rng.uniform_pos() - 0.5);
  const double W = rng.exponential();
  if (alpha == 1.0) {
    if (std::abs(c_plus - c_minus) > 1e-15) throw SpecError("asymmetric stable with index 1 is unsupported");
    // Cauchy with scale pi * c
    return kPi * c_plus * std::tan(V) * dt;
  }
  const double total = c_plus + c_minus;
  const double sigma = std::pow(-std::tgamma(-alpha) * total * std::cos(kPi * alpha / 2.0), 1.0 / alpha);
  const double beta = (c_plus - c_minus) / total;
  const double t = beta * std::tan(kPi * alpha / 2.0);
  const double B = std::atan(t) / alpha;
  const double S = std::pow(1.0 + t * t, 1.0 / (2.0 * alpha));
  const double X = S * std::sin(alpha * (V + B)) / std::pow(std::cos(V), 1.0 / alpha) *
                   std::pow(std::cos(V - alpha * (V + B)) / W, (1.0 - alpha) / alpha);
  return sigma * X * std::pow(dt, 1.0 / alpha);
}

double sample_stable_increment(double alpha, double rho, double dt, Rng& rng) {
  if (!(rho > 0.0 && rho < 1.0)) throw SpecError("positivity parameter must lie in (0,1)");
  if (alpha > 1.0 && (rho < 1.0 - 1.0 / alpha || rho > 1.0 / alpha))
    throw SpecError("positivity parameter outside the admissible range for this index");
  if (alpha == 1.0 && rho != 0.5) throw SpecError("asymmetric stable with index 1 is unsupported");
  return sample_stable(alpha, stable_c_plus(alpha, rho), stable_c_minus(alpha, rho), dt, rng);
}

double sample_exact_increment(const LevyComponent& c, double dt, Rng& rng) {
  if (!c.finite_activity()) throw SpecError("component has infinite activity; use the truncated sampler");
  double x = 0.0;
  if (auto cp = c.cpp()) x += sample_cpp_events(cp->rate, cp->law, dt, rng).total();
  x += sample_brownian_increment(c.drift, c.gaussian, dt, rng);
  return x;
}

JumpSource JumpSource::from_law(double rate, const JumpLaw& law) {
  JumpSource s;
  s.rate_ = rate;
  s.law_ = law;
  return s;
}

JumpSource JumpSource::from_component(const LevyComponent& c, double eps) {
  if (auto cp = c.cpp()) return from_law(cp->rate, cp->law);
  JumpSource s;
  if (auto ld = c.levy_density()) {
    if (!(eps > 0.0) || eps >= 1.0) throw SpecError("small-jump cutoff must lie in (0,1)");
    const double up = ld->tail_above(eps), down = ld->tail_below(eps);
    if (!std::isfinite(up) || !std::isfinite(down)) throw SpecError("jump measure tail is not integrable at the cutoff");
    s.rate_ = up + down;
    s.p_up_ = s.rate_ > 0.0 ? up / s.rate_ : 0.0;
    s.dens_ = *ld;
    s.eps_ = eps;
  }
  return s;
}

double JumpSource::sample(Rng& rng) const {
  if (law_) return law_->sample(rng);
  if (dens_) return rng.uniform() < p_up_ ? dens_->sample_above(eps_, rng) : dens_->sample_below(eps_, rng);
  return 0.0;
}

TruncatedLevySampler::TruncatedLevySampler(const LevyComponent& c, double eps, bool gaussian_refinement) : comp_(c) {
  if (!(eps > 0.0) || eps >= 1.0) throw SpecError("small-jump cutoff must lie in (0,1)");
  if (c.finite_activity()) {
    exact_ = true;
    drift_ = c.drift;
    sigma_ = c.gaussian;
    if (auto cp = c.cpp()) jumps_ = JumpSource::from_law(cp->rate, cp->law);
    return;
  }
  auto ld = c.levy_density();
  drift_ = c.drift - ld->compensator(eps);
  double var = c.gaussian * c.gaussian;
  if (gaussian_refinement) var += ld->small_variance(eps);
  sigma_ = std::sqrt(var);
  jumps_ = JumpSource::from_component(c, eps);
}

double TruncatedLevySampler::sample_increment(double dt, Rng& rng) const {
  if (exact_) return sample_exact_increment(comp_, dt, rng);
  if (dt <= 0.0) return 0.0;
  double x = 0.0;
  std::poisson_distribution<long> pois(jumps_.rate() * dt);
  const long n = pois(rng);
  for (long k = 0; k < n; ++k) x += jumps_.sample(rng);
  return x + sample_brownian_increment(drift_, sigma_, dt, rng);
}

std::vector<double> coupled_truncated_increments(const LevyComponent& c, const std::vector<double>& eps_levels, double dt,
                                                 Rng& rng) {
  auto ld = c.levy_density();
  if (!ld) throw SpecError("coupled truncation needs a density-kind component");
  const double finest = *std::min_element(eps_levels.begin(), eps_levels.end());
  JumpSource src = JumpSource::from_component(c, finest);
  std::poisson_distribution<long> pois(src.rate() * dt);
  const long n = pois(rng);
  std::vector<double> jumps(static_cast<std::size_t>(n));
  for (auto& j : jumps) j = src.sample(rng);
  const double gauss = c.gaussian > 0.0 ? c.gaussian * std::sqrt(dt) * rng.normal() : 0.0;
  std::vector<double> out;
  for (double eps : eps_levels) {
    double x = (c.drift - ld->compensator(eps)) * dt + gauss;
    for (double j : jumps)
      if (std::abs(j) > eps) x += j;
    out.push_back(x);
  }
  return out;
}

}  // namespace mapfluct
