#include "mapfluct/levy_component.hpp"
#include "mapfluct/rng.hpp"

#include <cmath>

namespace mapfluct {

namespace {
constexpr double kPi = 3.14159265358979323846;
using cd = std::complex<double>;

// sin(u) - u without cancellation for small u
double sin_minus_id(double u) {
  if (std::abs(u) < 1e-2) {
    const double u2 = u * u;
    return -u * u2 / 6.0 * (1.0 - u2 / 20.0 * (1.0 - u2 / 42.0));
  }
  return std::sin(u) - u;
}

double cos_minus_one(double u) {
  const double s = std::sin(0.5 * u);
  return -2.0 * s * s;
}
}  // namespace

double stable_c_plus(double alpha, double rho) { return std::tgamma(alpha + 1.0) * std::sin(kPi * alpha * rho) / kPi; }
double stable_c_minus(double alpha, double rho) {
  return std::tgamma(alpha + 1.0) * std::sin(kPi * alpha * (1.0 - rho)) / kPi;
}

LevyDensity::LevyDensity(const StableJumps& s) : stable_(true), alpha_(s.alpha), cp_(s.c_plus), cm_(s.c_minus) {
  if (!(alpha_ > 0.0 && alpha_ < 2.0) || alpha_ == 1.0) throw SpecError("stable index must lie in (0,2) minus {1}");
  if (cp_ < 0.0 || cm_ < 0.0) throw SpecError("stable coefficients must be nonnegative");
}

LevyDensity::LevyDensity(const LampertiJumps& l) : stable_(false), alpha_(l.alpha), mirror_(l.mirrored) {
  if (!(alpha_ > 0.0 && alpha_ < 1.0)) throw SpecError("lamperti-stable index must lie in (0,1)");
  if (!(l.rho > 0.0 && l.rho < 1.0)) throw SpecError("positivity parameter must lie in (0,1)");
  if (l.phase_sign != 1 && l.phase_sign != -1) throw SpecError("phase sign must be +1 or -1");
  const double cplus = stable_c_plus(alpha_, l.rho), cminus = stable_c_minus(alpha_, l.rho);
  cp_ = l.phase_sign > 0 ? cplus : cminus;
  cm_ = l.phase_sign > 0 ? cminus : cplus;
}

double LevyDensity::base_density(double x) const {
  const double a = alpha_;
  if (x == 0.0) return kInf;
  if (stable_) return (x > 0 ? cp_ : cm_) * std::pow(std::abs(x), -a - 1.0);
  if (x > 0) return cp_ * std::exp(x - (a + 1.0) * std::log(std::expm1(x)));
  return cm_ * std::exp(x - (a + 1.0) * std::log(-std::expm1(x)));
}

double LevyDensity::density(double x) const { return base_density(mirror_ ? -x : x); }

double LevyDensity::tail_above(double y) const {
  const double a = alpha_;
  if (mirror_) {
    // base tail below
    return stable_ ? cm_ * std::pow(y, -a) / a : cm_ * (std::pow(-std::expm1(-y), -a) - 1.0) / a;
  }
  return stable_ ? cp_ * std::pow(y, -a) / a : cp_ * std::pow(std::expm1(y), -a) / a;
}

double LevyDensity::tail_below(double z) const {
  const double a = alpha_;
  if (mirror_) return stable_ ? cp_ * std::pow(z, -a) / a : cp_ * std::pow(std::expm1(z), -a) / a;
  return stable_ ? cm_ * std::pow(z, -a) / a : cm_ * (std::pow(-std::expm1(-z), -a) - 1.0) / a;
}

namespace {
double lamperti_pos_sample(double a, double y, Rng& rng) {
  return std::log1p(std::expm1(y) * std::pow(rng.uniform_pos(), -1.0 / a));
}
double lamperti_neg_sample(double a, double z, Rng& rng) {
  const double w = 1.0 + rng.uniform_pos() * (std::pow(-std::expm1(-z), -a) - 1.0);
  return std::log1p(-std::pow(w, -1.0 / a));  // negative jump
}
}  // namespace

double LevyDensity::sample_above(double y, Rng& rng) const {
  if (stable_) return y * std::pow(rng.uniform_pos(), -1.0 / alpha_);
  return mirror_ ? -lamperti_neg_sample(alpha_, y, rng) : lamperti_pos_sample(alpha_, y, rng);
}

double LevyDensity::sample_below(double z, Rng& rng) const {
  if (stable_) return -z * std::pow(rng.uniform_pos(), -1.0 / alpha_);
  return mirror_ ? -lamperti_pos_sample(alpha_, z, rng) : lamperti_neg_sample(alpha_, z, rng);
}

double LevyDensity::compensator(double eps) const {
  const double a = alpha_;
  if (stable_) return (cp_ - cm_) * (1.0 - std::pow(eps, 1.0 - a)) / (1.0 - a);
  // near 0 the density overflows; use its leading power instead
  const double up = mirror_ ? cm_ : cp_, down = mirror_ ? cp_ : cm_;
  auto f = [&](double x) { return x < 1e-100 ? (up - down) * std::pow(x, -a) : x * (density(x) - density(-x)); };
  return integrate_singular(f, eps, 1.0, 1e-12);
}

double LevyDensity::small_variance(double eps) const {
  const double a = alpha_;
  if (stable_) return (cp_ + cm_) * std::pow(eps, 2.0 - a) / (2.0 - a);
  auto f = [&](double x) { return x < 1e-100 ? (cp_ + cm_) * std::pow(x, 1.0 - a) : x * x * (density(x) + density(-x)); };
  return integrate_singular(f, 0.0, eps, 1e-12);
}

Moment LevyDensity::big_jump_mean() const {
  const double a = alpha_;
  if (stable_) {
    if (cp_ == 0.0 && cm_ == 0.0) return Moment::of(0.0);
    if (a <= 1.0) return Moment::infinite();
    return Moment::of((cp_ - cm_) / (a - 1.0));
  }
  auto f = [&](double x) { return x * (density(x) - density(-x)); };
  return Moment::of(integrate(f, 1.0, kInf, 1e-12));
}

Moment LevyDensity::exp_tail_integral(double s) const {
  const double pos_coef = mirror_ ? cm_ : cp_;
  if (pos_coef == 0.0) return Moment::of(0.0);
  // decay rate of the density on the positive half line
  double decay;
  if (stable_)
    decay = 0.0;
  else
    decay = mirror_ ? 1.0 : alpha_;
  if (stable_ ? s > 0.0 : s >= decay) return Moment::infinite();
  return Moment::of(integrate([&](double x) { return std::exp(s * x) * density(x); }, 1.0, kInf, 1e-12));
}

double LevyDensity::exp_tail_integral_to(double s, double upper) const {
  return integrate([&](double x) { return std::exp(s * x) * density(x); }, 1.0, upper, 1e-12);
}

Moment LevyDensity::power_tail_integral(double p) const {
  const double pos_coef = mirror_ ? cm_ : cp_;
  if (pos_coef == 0.0) return Moment::of(0.0);
  if (stable_) return p < alpha_ ? Moment::of(pos_coef / (alpha_ - p)) : Moment::infinite();
  return Moment::of(integrate([&](double x) { return std::pow(x, p) * density(x); }, 1.0, kInf, 1e-12));
}

std::complex<double> LevyDensity::exponent(double theta) const {
  if (theta == 0.0) return 0.0;
  const double a = alpha_;
  if (stable_) {
    const double g = std::tgamma(-a) * std::pow(std::abs(theta), a);
    const double sg = theta > 0 ? 1.0 : -1.0;
    const cd strict = g * cd((cp_ + cm_) * std::cos(kPi * a / 2.0), -sg * (cp_ - cm_) * std::sin(kPi * a / 2.0));
    // strictly stable law carries drift (c+ - c-)/(1 - a) in the truncated form
    return strict - cd(0.0, theta * (cp_ - cm_) / (1.0 - a));
  }
  auto re_small = [&](double x) {
    return x < 1e-100 ? 0.0 : cos_minus_one(theta * x) * (density(x) + density(-x));
  };
  auto im_small = [&](double x) {
    return x < 1e-100 ? 0.0 : sin_minus_id(theta * x) * (density(x) - density(-x));
  };
  double re = integrate_singular(re_small, 0.0, 1.0, 1e-12);
  double im = integrate_singular(im_small, 0.0, 1.0, 1e-12);
  // oscillatory tails: integrate period by period until the density is negligible
  const double decay = std::min(alpha_, 1.0);
  const double upper = 1.0 + 40.0 / decay;
  const double period = 2.0 * kPi / std::abs(theta);
  const int pieces = std::max(1, std::min(4000, static_cast<int>(std::ceil((upper - 1.0) / period))));
  const double h = (upper - 1.0) / pieces;
  for (int k = 0; k < pieces; ++k) {
    const double lo = 1.0 + k * h, hi = lo + h;
    re += integrate([&](double x) { return (std::cos(theta * x) - 1.0) * (density(x) + density(-x)); }, lo, hi, 1e-12);
    im += integrate([&](double x) { return std::sin(theta * x) * (density(x) - density(-x)); }, lo, hi, 1e-12);
  }
  // beyond upper only the -1 part of the real integrand matters
  re -= tail_above(upper) + tail_below(upper);
  return {re, im};
}

std::optional<LevyDensity> LevyComponent::levy_density() const {
  if (auto s = std::get_if<StableJumps>(&jumps)) return LevyDensity(*s);
  if (auto l = std::get_if<LampertiJumps>(&jumps)) return LevyDensity(*l);
  return std::nullopt;
}

Moment LevyComponent::mean() const {
  if (auto c = cpp()) {
    auto m = c->law.mean();
    if (!m.finite) return m;
    return Moment::of(drift + c->rate * m.value);
  }
  if (auto ld = levy_density()) {
    auto m = ld->big_jump_mean();
    if (!m.finite) return m;
    return Moment::of(drift + m.value);
  }
  return Moment::of(drift);
}

std::complex<double> LevyComponent::exponent(double theta) const {
  cd v(-0.5 * gaussian * gaussian * theta * theta, drift * theta);
  if (auto c = cpp()) v += c->rate * (c->law.char_fn(theta) - 1.0);
  if (auto ld = levy_density()) v += ld->exponent(theta);
  return v;
}

LevyComponent LevyComponent::negated() const {
  LevyComponent out = *this;
  out.drift = -drift;
  if (auto c = cpp()) {
    out.jumps = CompoundPoisson{c->rate, c->law.negate()};
  } else if (auto s = std::get_if<StableJumps>(&jumps)) {
    out.jumps = StableJumps{s->alpha, s->c_minus, s->c_plus};
  } else if (auto l = std::get_if<LampertiJumps>(&jumps)) {
    LampertiJumps m = *l;
    m.mirrored = !m.mirrored;
    out.jumps = m;
  }
  return out;
}

bool LevyComponent::unbounded_variation() const {
  if (gaussian > 0.0) return true;
  if (auto s = std::get_if<StableJumps>(&jumps)) return s->alpha > 1.0 && (s->c_plus > 0.0 || s->c_minus > 0.0);
  return false;
}

bool LevyComponent::positive_jumps() const {
  if (auto c = cpp()) return c->rate > 0.0 && c->law.tail(0.0) > 0.0;
  if (auto ld = levy_density()) return ld->tail_above(1.0) > 0.0;
  return false;
}

Moment LevyComponent::exp_tail(double s) const {
  if (auto c = cpp()) {
    if (c->rate == 0.0 || c->law.support_hi() <= 1.0) return Moment::of(0.0);
    if (!c->law.exp_moment(s).finite) return Moment::infinite();
    return Moment::of(c->rate * c->law.expect([s](double x) { return x > 1.0 ? std::exp(s * x) : 0.0; }, {1.0}));
  }
  if (auto ld = levy_density()) return ld->exp_tail_integral(s);
  return Moment::of(0.0);
}

Moment LevyComponent::power_tail(double p) const {
  if (auto c = cpp()) {
    if (c->rate == 0.0 || c->law.support_hi() <= 1.0) return Moment::of(0.0);
    if (!c->law.abs_moment(p).finite) return Moment::infinite();
    return Moment::of(c->rate * c->law.expect([p](double x) { return x > 1.0 ? std::pow(x, p) : 0.0; }, {1.0}));
  }
  if (auto ld = levy_density()) return ld->power_tail_integral(p);
  return Moment::of(0.0);
}

std::vector<Interval> LevyComponent::jump_density_support() const {
  if (auto c = cpp()) return c->rate > 0.0 ? c->law.density_support() : std::vector<Interval>{};
  if (auto ld = levy_density()) {
    std::vector<Interval> out;
    if (ld->tail_below(1.0) > 0.0) out.push_back({-kInf, 0.0});
    if (ld->tail_above(1.0) > 0.0) out.push_back({0.0, kInf});
    return out;
  }
  return {};
}

}  // namespace mapfluct
