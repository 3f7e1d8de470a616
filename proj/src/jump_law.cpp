#include "mapfluct/jump_law.hpp"
#include "mapfluct/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mapfluct {

struct JumpLaw::Data {
  Kind kind;
  std::vector<double> p;
  std::vector<JumpLaw> kids;
  std::vector<double> edges;
  std::vector<double> weights;
  std::vector<double> cum;  // histogram / mixture cumulative weights
};

namespace {

using Kind = JumpLaw::Kind;
using cd = std::complex<double>;

// log(1 + e^x) without overflow
double log1pexp(double x) { return x > 30.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double uniform_exp_mean(double s, double lo, double hi) {
  // E exp(sU) for U uniform on [lo, hi]
  const double w = hi - lo;
  const double z = s * w;
  if (std::abs(z) < 1e-12) return std::exp(s * lo);
  return std::exp(s * lo) * std::expm1(z) / z;
}

cd uniform_cf(double theta, double lo, double hi) {
  const double w = hi - lo;
  const double z = theta * w;
  if (std::abs(z) < 1e-12) return std::exp(cd(0.0, theta * lo));
  // (e^{i theta hi} - e^{i theta lo}) / (i theta w)
  return (std::exp(cd(0.0, theta * hi)) - std::exp(cd(0.0, theta * lo))) / cd(0.0, z);
}

std::vector<Interval> merge_intervals(std::vector<Interval> v) {
  std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> out;
  for (const auto& iv : v) {
    if (!(iv.hi > iv.lo)) continue;
    if (!out.empty() && iv.lo <= out.back().hi)
      out.back().hi = std::max(out.back().hi, iv.hi);
    else
      out.push_back(iv);
  }
  return out;
}

void collect_breaks(const JumpLaw& law, std::vector<double>& out) {
  switch (law.kind()) {
    case Kind::Exponential:
      out.push_back(0.0);
      break;
    case Kind::Pareto:
      out.push_back(law.params()[1]);
      break;
    case Kind::Uniform:
      out.push_back(law.params()[0]);
      out.push_back(law.params()[1]);
      break;
    case Kind::PointMass:
    case Kind::GenLogistic:
      break;
    case Kind::Negated: {
      std::vector<double> inner;
      collect_breaks(law.children()[0], inner);
      for (double b : inner) out.push_back(-b);
      break;
    }
    case Kind::Histogram:
      out.insert(out.end(), law.edges().begin(), law.edges().end());
      break;
    case Kind::TruncatedAbove:
    case Kind::TruncatedBelow:
      out.push_back(law.params()[0]);
      collect_breaks(law.children()[0], out);
      break;
    case Kind::Mixture:
      for (const auto& k : law.children()) collect_breaks(k, out);
      break;
  }
}

double generic_quantile(const JumpLaw& law, double u) {
  double lo = law.support_lo(), hi = law.support_hi();
  if (!std::isfinite(lo)) {
    lo = std::isfinite(hi) ? hi - 1.0 : -1.0;
    while (law.cdf(lo) > u) lo = 2.0 * lo - 1.0;
  }
  if (!std::isfinite(hi)) {
    hi = lo + 1.0;
    while (law.cdf(hi) < u) hi = hi + 2.0 * (hi - lo);
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (law.cdf(mid) >= u)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

std::shared_ptr<JumpLaw::Data> blank(Kind k) {
  auto d = std::make_shared<JumpLaw::Data>();
  d->kind = k;
  return d;
}

}  // namespace

// ---- construction ----

JumpLaw JumpLaw::exponential(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw SpecError("exponential rate must be positive");
  auto d = blank(Kind::Exponential);
  d->p = {rate};
  return JumpLaw(d);
}

JumpLaw JumpLaw::pareto(double index, double scale) {
  if (!(index > 0.0) || !(scale > 0.0)) throw SpecError("pareto index and scale must be positive");
  auto d = blank(Kind::Pareto);
  d->p = {index, scale};
  return JumpLaw(d);
}

JumpLaw JumpLaw::point_mass(double location) {
  if (!std::isfinite(location)) throw SpecError("point mass location must be finite");
  auto d = blank(Kind::PointMass);
  d->p = {location};
  return JumpLaw(d);
}

JumpLaw JumpLaw::uniform(double lo, double hi) {
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) throw SpecError("uniform needs lo < hi");
  auto d = blank(Kind::Uniform);
  d->p = {lo, hi};
  return JumpLaw(d);
}

JumpLaw JumpLaw::generalized_logistic(double alpha) {
  if (!(alpha > 0.0)) throw SpecError("generalized logistic index must be positive");
  auto d = blank(Kind::GenLogistic);
  d->p = {alpha};
  return JumpLaw(d);
}

JumpLaw JumpLaw::histogram(std::vector<double> edges, std::vector<double> weights, double atom_zero, double overflow,
                           double overflow_at) {
  if (edges.size() < 2 || weights.size() + 1 != edges.size()) throw SpecError("histogram needs K+1 edges for K bins");
  for (std::size_t k = 0; k + 1 < edges.size(); ++k)
    if (!(edges[k + 1] > edges[k])) throw SpecError("histogram edges must increase");
  double total = atom_zero + overflow;
  for (double w : weights) {
    if (w < 0.0) throw SpecError("histogram weights must be nonnegative");
    total += w;
  }
  if (atom_zero < 0.0 || overflow < 0.0) throw SpecError("histogram atoms must be nonnegative");
  if (!(total > 0.0)) throw SpecError("histogram has no mass");
  auto d = blank(Kind::Histogram);
  for (double& w : weights) w /= total;
  d->p = {atom_zero / total, overflow / total, overflow_at};
  d->cum.assign(weights.size() + 1, 0.0);
  for (std::size_t k = 0; k < weights.size(); ++k) d->cum[k + 1] = d->cum[k] + weights[k];
  d->edges = std::move(edges);
  d->weights = std::move(weights);
  return JumpLaw(d);
}

JumpLaw JumpLaw::truncated_above(const JumpLaw& inner, double cutoff) {
  if (!(inner.cdf(cutoff) > 0.0)) throw SpecError("truncation removes all mass");
  auto d = blank(Kind::TruncatedAbove);
  d->p = {cutoff};
  d->kids = {inner};
  return JumpLaw(d);
}

JumpLaw JumpLaw::truncated_below(const JumpLaw& inner, double cutoff) {
  if (!(inner.tail(cutoff) > 0.0)) throw SpecError("truncation removes all mass");
  auto d = blank(Kind::TruncatedBelow);
  d->p = {cutoff};
  d->kids = {inner};
  return JumpLaw(d);
}

JumpLaw JumpLaw::mixture(std::vector<double> weights, std::vector<JumpLaw> laws) {
  if (weights.empty() || weights.size() != laws.size()) throw SpecError("mixture needs one weight per law");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw SpecError("mixture weights must be nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw SpecError("mixture weights sum to zero");
  auto d = blank(Kind::Mixture);
  d->cum.assign(weights.size() + 1, 0.0);
  for (std::size_t k = 0; k < weights.size(); ++k) {
    weights[k] /= total;
    d->cum[k + 1] = d->cum[k] + weights[k];
  }
  d->weights = std::move(weights);
  d->kids = std::move(laws);
  return JumpLaw(d);
}

JumpLaw JumpLaw::negate() const {
  if (d_->kind == Kind::Negated) return d_->kids[0];
  auto d = blank(Kind::Negated);
  d->kids = {*this};
  return JumpLaw(d);
}

JumpLaw::Kind JumpLaw::kind() const { return d_->kind; }
const std::vector<double>& JumpLaw::params() const { return d_->p; }
const std::vector<JumpLaw>& JumpLaw::children() const { return d_->kids; }
const std::vector<double>& JumpLaw::edges() const { return d_->edges; }
const std::vector<double>& JumpLaw::weights() const { return d_->weights; }

// ---- distribution functions ----

namespace {

double hist_bins_cdf(const JumpLaw::Data& d, double x) {
  const auto& e = d.edges;
  if (x <= e.front()) return 0.0;
  if (x >= e.back()) return d.cum.back();
  const std::size_t k = static_cast<std::size_t>(std::upper_bound(e.begin(), e.end(), x) - e.begin()) - 1;
  return d.cum[k] + d.weights[k] * (x - e[k]) / (e[k + 1] - e[k]);
}

}  // namespace

double JumpLaw::cdf(double x) const {
  const auto& d = *d_;
  const auto& p = d.p;
  switch (d.kind) {
    case Kind::Exponential:
      return x <= 0.0 ? 0.0 : -std::expm1(-p[0] * x);
    case Kind::Pareto:
      return x <= p[1] ? 0.0 : 1.0 - std::pow(p[1] / x, p[0]);
    case Kind::PointMass:
      return x >= p[0] ? 1.0 : 0.0;
    case Kind::Uniform:
      return std::clamp((x - p[0]) / (p[1] - p[0]), 0.0, 1.0);
    case Kind::Negated:
      return 1.0 - d.kids[0].cdf_below(-x);
    case Kind::GenLogistic:
      return -std::expm1(-p[0] * log1pexp(x));
    case Kind::Histogram:
      return hist_bins_cdf(d, x) + (x >= 0.0 ? p[0] : 0.0) + (x >= p[2] ? p[1] : 0.0);
    case Kind::TruncatedAbove: {
      if (x >= p[0]) return 1.0;
      return d.kids[0].cdf(x) / d.kids[0].cdf(p[0]);
    }
    case Kind::TruncatedBelow: {
      if (x <= p[0]) return 0.0;
      const auto& in = d.kids[0];
      return (in.cdf(x) - in.cdf(p[0])) / in.tail(p[0]);
    }
    case Kind::Mixture: {
      double s = 0.0;
      for (std::size_t k = 0; k < d.kids.size(); ++k) s += d.weights[k] * d.kids[k].cdf(x);
      return s;
    }
  }
  return 0.0;
}

double JumpLaw::cdf_below(double x) const {
  const auto& d = *d_;
  const auto& p = d.p;
  switch (d.kind) {
    case Kind::PointMass:
      return x > p[0] ? 1.0 : 0.0;
    case Kind::Negated:
      return 1.0 - d.kids[0].cdf(-x);
    case Kind::Histogram:
      return hist_bins_cdf(d, x) + (x > 0.0 ? p[0] : 0.0) + (x > p[2] ? p[1] : 0.0);
    case Kind::TruncatedAbove: {
      if (x > p[0]) return 1.0;
      return d.kids[0].cdf_below(x) / d.kids[0].cdf(p[0]);
    }
    case Kind::TruncatedBelow: {
      if (x <= p[0]) return 0.0;
      const auto& in = d.kids[0];
      return (in.cdf_below(x) - in.cdf(p[0])) / in.tail(p[0]);
    }
    case Kind::Mixture: {
      double s = 0.0;
      for (std::size_t k = 0; k < d.kids.size(); ++k) s += d.weights[k] * d.kids[k].cdf_below(x);
      return s;
    }
    default:
      return cdf(x);
  }
}

double JumpLaw::density(double x) const {
  const auto& d = *d_;
  const auto& p = d.p;
  switch (d.kind) {
    case Kind::Exponential:
      return x < 0.0 ? 0.0 : p[0] * std::exp(-p[0] * x);
    case Kind::Pareto:
      return x < p[1] ? 0.0 : p[0] / p[1] * std::pow(p[1] / x, p[0] + 1.0);
    case Kind::PointMass:
      return 0.0;
    case Kind::Uniform:
      return (x < p[0] || x > p[1]) ? 0.0 : 1.0 / (p[1] - p[0]);
    case Kind::Negated:
      return d.kids[0].density(-x);
    case Kind::GenLogistic:
      return p[0] * std::exp(x - (p[0] + 1.0) * log1pexp(x));
    case Kind::Histogram: {
      const auto& e = d.edges;
      if (x < e.front() || x >= e.back()) return 0.0;
      const std::size_t k = static_cast<std::size_t>(std::upper_bound(e.begin(), e.end(), x) - e.begin()) - 1;
      return d.weights[k] / (e[k + 1] - e[k]);
    }
    case Kind::TruncatedAbove:
      return x > p[0] ? 0.0 : d.kids[0].density(x) / d.kids[0].cdf(p[0]);
    case Kind::TruncatedBelow:
      return x <= p[0] ? 0.0 : d.kids[0].density(x) / d.kids[0].tail(p[0]);
    case Kind::Mixture: {
      double s = 0.0;
      for (std::size_t k = 0; k < d.kids.size(); ++k) s += d.weights[k] * d.kids[k].density(x);
      return s;
    }
  }
  return 0.0;
}

std::vector<std::pair<double, double>> JumpLaw::atoms() const {
  const auto& d = *d_;
  const auto& p = d.p;
  std::vector<std::pair<double, double>> out;
  switch (d.kind) {
    case Kind::PointMass:
      out.push_back({p[0], 1.0});
      break;
    case Kind::Negated:
      for (auto [x, m] : d.kids[0].atoms()) out.push_back({-x, m});
      break;
    case Kind::Histogram:
      if (p[0] > 0.0) out.push_back({0.0, p[0]});
      if (p[1] > 0.0) out.push_back({p[2], p[1]});
      break;
    case Kind::TruncatedAbove: {
      const double z = d.kids[0].cdf(p[0]);
      for (auto [x, m] : d.kids[0].atoms())
        if (x <= p[0]) out.push_back({x, m / z});
      break;
    }
    case Kind::TruncatedBelow: {
      const double z = d.kids[0].tail(p[0]);
      for (auto [x, m] : d.kids[0].atoms())
        if (x > p[0]) out.push_back({x, m / z});
      break;
    }
    case Kind::Mixture:
      for (std::size_t k = 0; k < d.kids.size(); ++k)
        for (auto [x, m] : d.kids[k].atoms()) out.push_back({x, d.weights[k] * m});
      break;
    default:
      break;
  }
  return out;
}

std::vector<Interval> JumpLaw::density_support() const {
  const auto& d = *d_;
  const auto& p = d.p;
  switch (d.kind) {
    case Kind::Exponential:
      return {{0.0, kInf}};
    case Kind::Pareto:
      return {{p[1], kInf}};
    case Kind::PointMass:
      return {};
    case Kind::Uniform:
      return {{p[0], p[1]}};
    case Kind::Negated: {
      std::vector<Interval> out;
      for (auto iv : d.kids[0].density_support()) out.push_back({-iv.hi, -iv.lo});
      return merge_intervals(out);
    }
    case Kind::GenLogistic:
      return {{-kInf, kInf}};
    case Kind::Histogram: {
      std::vector<Interval> out;
      for (std::size_t k = 0; k < d.weights.size(); ++k)
        if (d.weights[k] > 0.0) out.push_back({d.edges[k], d.edges[k + 1]});
      return merge_intervals(out);
    }
    case Kind::TruncatedAbove: {
      std::vector<Interval> out;
      for (auto iv : d.kids[0].density_support())
        if (iv.lo < p[0]) out.push_back({iv.lo, std::min(iv.hi, p[0])});
      return out;
    }
    case Kind::TruncatedBelow: {
      std::vector<Interval> out;
      for (auto iv : d.kids[0].density_support())
        if (iv.hi > p[0]) out.push_back({std::max(iv.lo, p[0]), iv.hi});
      return out;
    }
    case Kind::Mixture: {
      std::vector<Interval> out;
      for (std::size_t k = 0; k < d.kids.size(); ++k)
        if (d.weights[k] > 0.0)
          for (auto iv : d.kids[k].density_support()) out.push_back(iv);
      return merge_intervals(out);
    }
  }
  return {};
}

double JumpLaw::support_lo() const {
  const auto& d = *d_;
  const auto& p = d.p;
  switch (d.kind) {
    case Kind::Exponential:
      return 0.0;
    case Kind::Pareto:
      return p[1];
    case Kind::PointMass:
      return p[0];
    case Kind::Uniform:
      return p[0];
    case Kind::Negated:
      return -d.kids[0].support_hi();
    case Kind::GenLogistic:
      return -kInf;
    case Kind::Histogram: {
      double lo = kInf;
      for (std::size_t k = 0; k < d.weights.size(); ++k)
        if (d.weights[k] > 0.0) {
          lo = d.edges[k];
          break;
        }
      if (p[0] > 0.0) lo = std::min(lo, 0.0);
      if (p[1] > 0.0) lo = std::min(lo, p[2]);
      return lo;
    }
    case Kind::TruncatedAbove:
      return d.kids[0].support_lo();
    case Kind::TruncatedBelow:
      return std::max(p[0], d.kids[0].support_lo());
    case Kind::Mixture: {
      double lo = kInf;
      for (std::size_t k = 0; k < d.kids.size(); ++k)
        if (d.weights[k] > 0.0) lo = std::min(lo, d.kids[k].support_lo());
      return lo;
    }
  }
  return -kInf;
}

double JumpLaw::support_hi() const {
  const auto& d = *d_;
  const auto& p = d.p;
  switch (d.kind) {
    case Kind::Exponential:
    case Kind::Pareto:
    case Kind::GenLogistic:
      return kInf;
    case Kind::PointMass:
      return p[0];
    case Kind::Uniform:
      return p[1];
    case Kind::Negated:
      return -d.kids[0].support_lo();
    case Kind::Histogram: {
      double hi = -kInf;
      for (std::size_t k = d.weights.size(); k-- > 0;)
        if (d.weights[k] > 0.0) {
          hi = d.edges[k + 1];
          break;
        }
      if (p[0] > 0.0) hi = std::max(hi, 0.0);
      if (p[1] > 0.0) hi = std::max(hi, p[2]);
      return hi;
    }
    case Kind::TruncatedAbove:
      return std::min(p[0], d.kids[0].support_hi());
    case Kind::TruncatedBelow:
      return d.kids[0].support_hi();
    case Kind::Mixture: {
      double hi = -kInf;
      for (std::size_t k = 0; k < d.kids.size(); ++k)
        if (d.weights[k] > 0.0) hi = std::max(hi, d.kids[k].support_hi());
      return hi;
    }
  }
  return kInf;
}

// ---- sampling ----

double JumpLaw::sample(Rng& rng) const {
  const auto& d = *d_;
  const auto& p = d.p;
  switch (d.kind) {
    case Kind::Exponential:
      return rng.exponential() / p[0];
    case Kind::Pareto:
      return p[1] * std::pow(rng.uniform_pos(), -1.0 / p[0]);
    case Kind::PointMass:
      return p[0];
    case Kind::Uniform:
      return p[0] + (p[1] - p[0]) * rng.uniform();
    case Kind::Negated:
      return -d.kids[0].sample(rng);
    case Kind::GenLogistic: {
      // tail (1+e^x)^{-a} = U  =>  x = log(U^{-1/a} - 1)
      const double u = rng.uniform_pos();
      const double v = -std::log(u) / p[0];  // log(U^{-1/a})
      return v > 30.0 ? v + std::log1p(-std::exp(-v)) : std::log(std::expm1(v));
    }
    case Kind::Histogram: {
      double u = rng.uniform();
      if (u < p[0]) return 0.0;
      u -= p[0];
      if (u < p[1]) return p[2];
      u -= p[1];
      const auto& c = d.cum;
      std::size_t k = static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), u) - c.begin());
      k = std::clamp<std::size_t>(k, 1, d.weights.size()) - 1;
      while (d.weights[k] <= 0.0 && k + 1 < d.weights.size()) ++k;
      return d.edges[k] + (d.edges[k + 1] - d.edges[k]) * rng.uniform();
    }
    case Kind::TruncatedAbove:
    case Kind::TruncatedBelow: {
      const auto& in = d.kids[0];
      const bool above = d.kind == Kind::TruncatedAbove;
      const double z = above ? in.cdf(p[0]) : in.tail(p[0]);
      if (z > 0.05) {
        for (int it = 0; it < 100000; ++it) {
          const double x = in.sample(rng);
          if (above ? x <= p[0] : x > p[0]) return x;
        }
      }
      const double u = rng.uniform_pos();
      return generic_quantile(*this, u);
    }
    case Kind::Mixture: {
      const double u = rng.uniform();
      const auto& c = d.cum;
      std::size_t k = static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), u) - c.begin());
      k = std::clamp<std::size_t>(k, 1, d.kids.size()) - 1;
      return d.kids[k].sample(rng);
    }
  }
  return 0.0;
}

double JumpLaw::sample_size_biased(Rng& rng) const {
  const auto& d = *d_;
  const auto& p = d.p;
  switch (d.kind) {
    case Kind::Exponential:
      return (rng.exponential() + rng.exponential()) / p[0];
    case Kind::Pareto:
      if (!(p[0] > 1.0)) throw ComputeError("size-biased pareto needs index > 1");
      return p[1] * std::pow(rng.uniform_pos(), -1.0 / (p[0] - 1.0));
    case Kind::PointMass:
      return p[0];
    case Kind::Uniform: {
      if (p[0] < 0.0) break;
      const double lo2 = p[0] * p[0], hi2 = p[1] * p[1];
      return std::sqrt(lo2 + rng.uniform() * (hi2 - lo2));
    }
    case Kind::Histogram: {
      if (d.edges.front() < 0.0) break;
      // bin weight times bin mean; the atom at 0 gets no weight
      std::vector<double> w(d.weights.size() + 1);
      double total = 0.0;
      for (std::size_t k = 0; k < d.weights.size(); ++k) {
        w[k] = d.weights[k] * 0.5 * (d.edges[k] + d.edges[k + 1]);
        total += w[k];
      }
      w.back() = p[1] * p[2];
      total += w.back();
      double u = rng.uniform() * total;
      for (std::size_t k = 0; k < d.weights.size(); ++k) {
        if (u < w[k]) {
          const double lo2 = d.edges[k] * d.edges[k], hi2 = d.edges[k + 1] * d.edges[k + 1];
          return std::sqrt(lo2 + rng.uniform() * (hi2 - lo2));
        }
        u -= w[k];
      }
      return p[2];
    }
    case Kind::TruncatedAbove:
    case Kind::TruncatedBelow: {
      const bool above = d.kind == Kind::TruncatedAbove;
      for (int it = 0; it < 1000000; ++it) {
        const double x = d.kids[0].sample_size_biased(rng);
        if (above ? x <= p[0] : x > p[0]) return x;
      }
      throw ComputeError("size-biased truncated sampling did not accept");
    }
    case Kind::Mixture: {
      std::vector<double> w(d.kids.size());
      double total = 0.0;
      for (std::size_t k = 0; k < d.kids.size(); ++k) {
        w[k] = d.weights[k] * d.kids[k].mean().value;
        total += w[k];
      }
      double u = rng.uniform() * total;
      for (std::size_t k = 0; k < d.kids.size(); ++k) {
        if (u < w[k] || k + 1 == d.kids.size()) return d.kids[k].sample_size_biased(rng);
        u -= w[k];
      }
      break;
    }
    default:
      break;
  }
  throw ComputeError("size-biased sampling needs a law on [0, inf): " + describe());
}

// ---- moments and transforms ----

Moment JumpLaw::mean() const {
  const auto& d = *d_;
  const auto& p = d.p;
  switch (d.kind) {
    case Kind::Exponential:
      return Moment::of(1.0 / p[0]);
    case Kind::Pareto:
      return p[0] > 1.0 ? Moment::of(p[0] * p[1] / (p[0] - 1.0)) : Moment::infinite();
    case Kind::PointMass:
      return Moment::of(p[0]);
    case Kind::Uniform:
      return Moment::of(0.5 * (p[0] + p[1]));
    case Kind::Negated: {
      auto m = d.kids[0].mean();
      return m.finite ? Moment::of(-m.value) : m;
    }
    case Kind::GenLogistic:
      return Moment::of(digamma(1.0) - digamma(p[0]));
    case Kind::Histogram: {
      double s = p[1] * p[2];
      for (std::size_t k = 0; k < d.weights.size(); ++k) s += d.weights[k] * 0.5 * (d.edges[k] + d.edges[k + 1]);
      return Moment::of(s);
    }
    case Kind::TruncatedAbove:
    case Kind::TruncatedBelow: {
      if (!abs_moment(1.0).finite) return Moment::infinite();
      return Moment::of(expect([](double x) { return x; }));
    }
    case Kind::Mixture: {
      double s = 0.0;
      for (std::size_t k = 0; k < d.kids.size(); ++k) {
        if (d.weights[k] == 0.0) continue;
        auto m = d.kids[k].mean();
        if (!m.finite) return m;
        s += d.weights[k] * m.value;
      }
      return Moment::of(s);
    }
  }
  return Moment::infinite();
}

Moment JumpLaw::exp_moment(double s) const {
  if (s == 0.0) return Moment::of(1.0);
  const auto& d = *d_;
  const auto& p = d.p;
  switch (d.kind) {
    case Kind::Exponential:
      return s < p[0] ? Moment::of(p[0] / (p[0] - s)) : Moment::infinite();
    case Kind::Pareto:
      if (s > 0.0) return Moment::infinite();
      return Moment::of(expect([s](double x) { return std::exp(s * x); }));
    case Kind::PointMass:
      return Moment::of(std::exp(s * p[0]));
    case Kind::Uniform:
      return Moment::of(uniform_exp_mean(s, p[0], p[1]));
    case Kind::Negated:
      return d.kids[0].exp_moment(-s);
    case Kind::GenLogistic: {
      const double a = p[0];
      if (!(s > -1.0 && s < a)) return Moment::infinite();
      return Moment::of(a * std::exp(std::lgamma(s + 1.0) + std::lgamma(a - s) - std::lgamma(a + 1.0)));
    }
    case Kind::Histogram: {
      double v = p[0] + p[1] * std::exp(s * p[2]);
      for (std::size_t k = 0; k < d.weights.size(); ++k)
        if (d.weights[k] > 0.0) v += d.weights[k] * uniform_exp_mean(s, d.edges[k], d.edges[k + 1]);
      return Moment::of(v);
    }
    case Kind::TruncatedAbove:
    case Kind::TruncatedBelow: {
      const bool bounded_side = (s > 0.0) ? std::isfinite(support_hi()) : std::isfinite(support_lo());
      if (!bounded_side && !d.kids[0].exp_moment(s).finite) return Moment::infinite();
      return Moment::of(expect([s](double x) { return std::exp(s * x); }));
    }
    case Kind::Mixture: {
      double v = 0.0;
      for (std::size_t k = 0; k < d.kids.size(); ++k) {
        if (d.weights[k] == 0.0) continue;
        auto m = d.kids[k].exp_moment(s);
        if (!m.finite) return m;
        v += d.weights[k] * m.value;
      }
      return Moment::of(v);
    }
  }
  return Moment::infinite();
}

Moment JumpLaw::abs_moment(double q) const {
  if (q == 0.0) return Moment::of(1.0);
  const auto& d = *d_;
  const auto& p = d.p;
  auto numeric = [&]() { return Moment::of(expect([q](double x) { return std::pow(std::abs(x), q); }, {0.0})); };
  switch (d.kind) {
    case Kind::Exponential:
      return Moment::of(std::tgamma(q + 1.0) / std::pow(p[0], q));
    case Kind::Pareto:
      return q < p[0] ? Moment::of(p[0] * std::pow(p[1], q) / (p[0] - q)) : Moment::infinite();
    case Kind::PointMass:
      return Moment::of(std::pow(std::abs(p[0]), q));
    case Kind::Negated:
      return d.kids[0].abs_moment(q);
    case Kind::Uniform:
    case Kind::GenLogistic:
    case Kind::Histogram:
      return numeric();
    case Kind::TruncatedAbove:
    case Kind::TruncatedBelow: {
      const bool bounded = std::isfinite(support_lo()) && std::isfinite(support_hi());
      if (!bounded && !d.kids[0].abs_moment(q).finite) return Moment::infinite();
      return numeric();
    }
    case Kind::Mixture: {
      double v = 0.0;
      for (std::size_t k = 0; k < d.kids.size(); ++k) {
        if (d.weights[k] == 0.0) continue;
        auto m = d.kids[k].abs_moment(q);
        if (!m.finite) return m;
        v += d.weights[k] * m.value;
      }
      return Moment::of(v);
    }
  }
  return Moment::infinite();
}

double JumpLaw::laplace(double s) const {
  auto m = exp_moment(-s);
  if (!m.finite) throw ComputeError("Laplace transform diverges for " + describe());
  return m.value;
}

std::complex<double> JumpLaw::char_fn(double theta) const {
  if (theta == 0.0) return 1.0;
  const auto& d = *d_;
  const auto& p = d.p;
  switch (d.kind) {
    case Kind::Exponential:
      return p[0] / cd(p[0], -theta);
    case Kind::Pareto: {
      // rotate the contour u = 1 + i s; for theta < 0 take the conjugate
      const double a = p[0], xm = p[1];
      const double th = std::abs(theta);
      const double kappa = th * xm;
      auto integrand = [&](double v, bool imag) {
        // v = kappa * s
        const cd w = std::pow(cd(1.0, v / kappa), -a - 1.0) * std::exp(-v);
        return imag ? w.imag() : w.real();
      };
      const double re = integrate([&](double v) { return integrand(v, false); }, 0.0, kInf, 1e-12);
      const double im = integrate([&](double v) { return integrand(v, true); }, 0.0, kInf, 1e-12);
      cd val = cd(0.0, a) * std::exp(cd(0.0, kappa)) * cd(re, im) / kappa;
      return theta > 0 ? val : std::conj(val);
    }
    case Kind::PointMass:
      return std::exp(cd(0.0, theta * p[0]));
    case Kind::Uniform:
      return uniform_cf(theta, p[0], p[1]);
    case Kind::Negated:
      return d.kids[0].char_fn(-theta);
    case Kind::GenLogistic: {
      const double a = p[0];
      return a * std::exp(complex_lgamma(cd(1.0, theta)) + complex_lgamma(cd(a, -theta)) - std::lgamma(a + 1.0));
    }
    case Kind::Histogram: {
      cd v = p[0] + p[1] * std::exp(cd(0.0, theta * p[2]));
      for (std::size_t k = 0; k < d.weights.size(); ++k)
        if (d.weights[k] > 0.0) v += d.weights[k] * uniform_cf(theta, d.edges[k], d.edges[k + 1]);
      return v;
    }
    case Kind::TruncatedAbove:
    case Kind::TruncatedBelow: {
      const double re = expect([theta](double x) { return std::cos(theta * x); });
      const double im = expect([theta](double x) { return std::sin(theta * x); });
      return {re, im};
    }
    case Kind::Mixture: {
      cd v = 0.0;
      for (std::size_t k = 0; k < d.kids.size(); ++k) v += d.weights[k] * d.kids[k].char_fn(theta);
      return v;
    }
  }
  return 1.0;
}

double JumpLaw::expect(const std::function<double(double)>& g, const std::vector<double>& kinks) const {
  CompensatedSum s;
  for (auto [x, m] : atoms()) s.add(m * g(x));
  const auto support = density_support();
  if (support.empty()) return s.value();
  std::vector<double> cuts;
  collect_breaks(*this, cuts);
  cuts.insert(cuts.end(), kinks.begin(), kinks.end());
  auto f = [&](double x) {
    const double dens = density(x);
    return dens == 0.0 ? 0.0 : g(x) * dens;
  };
  for (const auto& iv : support) {
    std::vector<double> pts = {iv.lo, iv.hi};
    for (double c : cuts)
      if (c > iv.lo && c < iv.hi) pts.push_back(c);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    s.add(integrate_pieces(f, pts, 1e-12));
  }
  return s.value();
}

double JumpLaw::integrated_tail(double a, double b) const {
  if (!(b > a)) return 0.0;
  if (d_->kind == Kind::Exponential && a >= 0.0) {
    const double mu = d_->p[0];
    const double ea = std::exp(-mu * a);
    return std::isfinite(b) ? -ea * std::expm1(-mu * (b - a)) / mu : ea / mu;
  }
  if (!std::isfinite(b)) {
    if (!abs_moment(1.0).finite) return kInf;
    return expect([a](double x) { return x > a ? x - a : 0.0; }, {a});
  }
  return expect([a, b](double x) { return std::clamp(x, a, b) - a; }, {a, b});
}

// ---- description and serialization ----

std::string JumpLaw::describe() const {
  std::ostringstream os;
  const auto& d = *d_;
  const auto& p = d.p;
  switch (d.kind) {
    case Kind::Exponential:
      os << "Exponential(" << p[0] << ")";
      break;
    case Kind::Pareto:
      os << "Pareto(" << p[0] << "," << p[1] << ")";
      break;
    case Kind::PointMass:
      os << "PointMass(" << p[0] << ")";
      break;
    case Kind::Uniform:
      os << "Uniform(" << p[0] << "," << p[1] << ")";
      break;
    case Kind::Negated:
      os << "Negated(" << d.kids[0].describe() << ")";
      break;
    case Kind::GenLogistic:
      os << "GenLogistic(" << p[0] << ")";
      break;
    case Kind::Histogram:
      os << "Histogram(" << d.weights.size() << " bins)";
      break;
    case Kind::TruncatedAbove:
      os << "TruncatedAbove(" << d.kids[0].describe() << "," << p[0] << ")";
      break;
    case Kind::TruncatedBelow:
      os << "TruncatedBelow(" << d.kids[0].describe() << "," << p[0] << ")";
      break;
    case Kind::Mixture:
      os << "Mixture(";
      for (std::size_t k = 0; k < d.kids.size(); ++k) os << (k ? "," : "") << d.weights[k] << "*" << d.kids[k].describe();
      os << ")";
      break;
  }
  return os.str();
}

nlohmann::json JumpLaw::to_json() const {
  using nlohmann::json;
  const auto& d = *d_;
  const auto& p = d.p;
  switch (d.kind) {
    case Kind::Exponential:
      return {{"type", "exponential"}, {"rate", p[0]}};
    case Kind::Pareto:
      return {{"type", "pareto"}, {"index", p[0]}, {"scale", p[1]}};
    case Kind::PointMass:
      return {{"type", "point_mass"}, {"location", p[0]}};
    case Kind::Uniform:
      return {{"type", "uniform"}, {"lo", p[0]}, {"hi", p[1]}};
    case Kind::Negated:
      return {{"type", "negated"}, {"inner", d.kids[0].to_json()}};
    case Kind::GenLogistic:
      return {{"type", "generalized_logistic"}, {"alpha", p[0]}};
    case Kind::Histogram:
      return {{"type", "histogram"}, {"edges", d.edges}, {"weights", d.weights},
              {"atom_zero", p[0]},   {"overflow", p[1]}, {"overflow_at", p[2]}};
    case Kind::TruncatedAbove:
      return {{"type", "truncated_above"}, {"inner", d.kids[0].to_json()}, {"cutoff", p[0]}};
    case Kind::TruncatedBelow:
      return {{"type", "truncated_below"}, {"inner", d.kids[0].to_json()}, {"cutoff", p[0]}};
    case Kind::Mixture: {
      json comps = json::array();
      for (std::size_t k = 0; k < d.kids.size(); ++k)
        comps.push_back({{"weight", d.weights[k]}, {"law", d.kids[k].to_json()}});
      return {{"type", "mixture"}, {"components", comps}};
    }
  }
  return {};
}

JumpLaw JumpLaw::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type")) throw SpecError("jump law must be an object with a 'type'");
  const std::string t = j.at("type").get<std::string>();
  auto num = [&](const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) throw SpecError(std::string("jump law '") + t + "' needs numeric '" + key + "'");
    return j.at(key).get<double>();
  };
  if (t == "exponential") return exponential(num("rate"));
  if (t == "pareto") return pareto(num("index"), num("scale"));
  if (t == "point_mass") return point_mass(num("location"));
  if (t == "uniform") return uniform(num("lo"), num("hi"));
  if (t == "negated") return from_json(j.at("inner")).negate();
  if (t == "generalized_logistic") return generalized_logistic(num("alpha"));
  if (t == "histogram")
    return histogram(j.at("edges").get<std::vector<double>>(), j.at("weights").get<std::vector<double>>(),
                     j.value("atom_zero", 0.0), j.value("overflow", 0.0), j.value("overflow_at", 0.0));
  if (t == "truncated_above") return truncated_above(from_json(j.at("inner")), num("cutoff"));
  if (t == "truncated_below") return truncated_below(from_json(j.at("inner")), num("cutoff"));
  if (t == "mixture") {
    std::vector<double> w;
    std::vector<JumpLaw> laws;
    for (const auto& c : j.at("components")) {
      w.push_back(c.at("weight").get<double>());
      laws.push_back(from_json(c.at("law")));
    }
    return mixture(std::move(w), std::move(laws));
  }
  throw SpecError("unknown jump law type '" + t + "'");
}

bool JumpLaw::approx_equal(const JumpLaw& other, double tol) const {
  const auto& a = *d_;
  const auto& b = *other.d_;
  if (a.kind != b.kind || a.p.size() != b.p.size() || a.kids.size() != b.kids.size() ||
      a.edges.size() != b.edges.size() || a.weights.size() != b.weights.size())
    return false;
  auto close = [tol](const std::vector<double>& x, const std::vector<double>& y) {
    for (std::size_t k = 0; k < x.size(); ++k)
      if (std::abs(x[k] - y[k]) > tol) return false;
    return true;
  };
  if (!close(a.p, b.p) || !close(a.edges, b.edges) || !close(a.weights, b.weights)) return false;
  for (std::size_t k = 0; k < a.kids.size(); ++k)
    if (!a.kids[k].approx_equal(b.kids[k], tol)) return false;
  return true;
}

}  // namespace mapfluct
