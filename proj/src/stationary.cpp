#include "mapfluct/stationary.hpp"

#include <algorithm>
#include <cmath>

namespace mapfluct {

double OvershootLawEval::mass() const {
  double m = 0.0;
  for (int i = 0; i < n(); ++i) {
    m += atoms[i] + overflow[i];
    for (double b : bins[i]) m += b;
  }
  return m;
}

InvariantMeasure::InvariantMeasure(const LadderSpec& ladder) : ladder_(ladder) {
  auto rep = validate(ladder);
  if (!rep.ok) throw SpecError("invalid ladder spec: " + rep.summary());
  const int n = ladder.n();
  pi_ = stationary_of_Q(ladder.Q);
  mass_ = 0.0;
  for (int i = 0; i < n; ++i) {
    const double p = pi_(i);
    parts_.push_back({0, i, i, p * ladder.drift[i]});
    if (const auto& cp = ladder.jumps[i]) {
      const Moment m = cp->law.mean();
      if (!m.finite) finite_ = false;
      parts_.push_back({1, i, i, p * cp->rate * m.value});
    }
    for (int j = 0; j < n; ++j) {
      if (j == i || ladder.Q(i, j) <= 0.0) continue;
      const Moment m = ladder.transition_law(i, j).mean();
      if (!m.finite) finite_ = false;
      parts_.push_back({2, i, j, p * ladder.Q(i, j) * m.value});
    }
  }
  double acc = 0.0;
  for (const auto& part : parts_) {
    acc += part.weight;
    cum_.push_back(acc);
  }
  mass_ = finite_ ? acc : kInf;
}

double InvariantMeasure::atom(int i) const { return pi_(i) * ladder_.drift[i]; }

double InvariantMeasure::density(double y, int i) const {
  double v = 0.0;
  if (const auto& cp = ladder_.jumps[i]) v += pi_(i) * cp->rate * cp->law.tail(y);
  for (int j = 0; j < n(); ++j) {
    if (j == i || ladder_.Q(j, i) <= 0.0) continue;
    v += pi_(j) * ladder_.Q(j, i) * ladder_.transition_law(j, i).tail(y);
  }
  return v;
}

double InvariantMeasure::mass_by_quadrature() const {
  std::vector<double> cuts = {0.0};
  auto add_cuts = [&](const JumpLaw& law) {
    for (double c : {law.support_lo(), law.support_hi()})
      if (std::isfinite(c) && c > 0.0) cuts.push_back(c);
    for (const auto& a : law.atoms())
      if (a.first > 0.0) cuts.push_back(a.first);
  };
  for (int i = 0; i < n(); ++i) {
    if (const auto& cp = ladder_.jumps[i]) add_cuts(cp->law);
    for (int j = 0; j < n(); ++j)
      if (j != i && ladder_.Q(i, j) > 0.0) add_cuts(ladder_.transition_law(i, j));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.push_back(kInf);
  double total = 0.0;
  for (int i = 0; i < n(); ++i) {
    total += atom(i);
    total += integrate_pieces([&](double y) { return density(y, i); }, cuts, 1e-12);
  }
  return total;
}

OvershootLawEval InvariantMeasure::discretize(const std::vector<double>& edges, bool normalized) const {
  if (edges.size() < 2 || edges.front() != 0.0) throw SpecError("law grid must start at 0");
  if (normalized && !finite_) throw ComputeError("no stationary distribution: the ladder height has infinite mean");
  const int nn = n();
  OvershootLawEval out;
  out.edges = edges;
  out.atoms.assign(static_cast<std::size_t>(nn), 0.0);
  out.bins.assign(static_cast<std::size_t>(nn), std::vector<double>(edges.size() - 1, 0.0));
  out.overflow.assign(static_cast<std::size_t>(nn), 0.0);
  const double scale = normalized ? 1.0 / mass_ : 1.0;
  for (int i = 0; i < nn; ++i) {
    out.atoms[i] = atom(i) * scale;
    auto add_law = [&](const JumpLaw& law, double w) {
      for (std::size_t k = 0; k + 1 < edges.size(); ++k) out.bins[i][k] += w * scale * law.integrated_tail(edges[k], edges[k + 1]);
      out.overflow[i] += w * scale * law.integrated_tail(edges.back(), kInf);
    };
    if (const auto& cp = ladder_.jumps[i]) add_law(cp->law, pi_(i) * cp->rate);
    for (int j = 0; j < nn; ++j)
      if (j != i && ladder_.Q(j, i) > 0.0) add_law(ladder_.transition_law(j, i), pi_(j) * ladder_.Q(j, i));
  }
  out.total = normalized ? 1.0 : mass_;
  return out;
}

std::pair<double, int> InvariantMeasure::sample(Rng& rng) const {
  if (!finite_) throw ComputeError("no stationary distribution: the ladder height has infinite mean");
  const double u = rng.uniform() * cum_.back();
  std::size_t k = static_cast<std::size_t>(std::upper_bound(cum_.begin(), cum_.end(), u) - cum_.begin());
  k = std::min(k, parts_.size() - 1);
  const Part& p = parts_[k];
  switch (p.type) {
    case 0:
      return {0.0, p.from};
    case 1:
      return {rng.uniform() * ladder_.jumps[p.from]->law.sample_size_biased(rng), p.from};
    default:
      return {rng.uniform() * ladder_.transition_law(p.from, p.to).sample_size_biased(rng), p.to};
  }
}

InvariantMeasure invariant_measure(const LadderSpec& ladder) { return InvariantMeasure(ladder); }

OvershootLawEval stationary_distribution(const LadderSpec& ladder, const std::vector<double>& edges) {
  for (double k : ladder.killing)
    if (k > 0.0) throw ComputeError("no stationary distribution: the ladder is killed");
  const InvariantMeasure chi(ladder);
  if (!chi.finite_mass()) throw ComputeError("no stationary distribution: the ladder height has infinite mean");
  OvershootLawEval rho = chi.discretize(edges, true);
  if (std::abs(rho.mass() - 1.0) > 1e-10) throw ComputeError("stationary law does not normalize to 1");
  return rho;
}

OvershootLawEval overshoot_marginal(const LadderSpec& ladder, const PotentialEstimate& U, double x, int i, double t,
                                    const std::vector<double>& edges) {
  if (edges.size() < 2 || edges.front() != 0.0) throw SpecError("law grid must start at 0");
  const int n = ladder.n();
  OvershootLawEval out;
  out.edges = edges;
  out.atoms.assign(static_cast<std::size_t>(n), 0.0);
  out.bins.assign(static_cast<std::size_t>(n), std::vector<double>(edges.size() - 1, 0.0));
  out.overflow.assign(static_cast<std::size_t>(n), 0.0);
  out.total = 1.0;
  if (x >= t) {
    const double y = x - t;
    if (y == 0.0) {
      out.atoms[i] = 1.0;
    } else if (y >= edges.back()) {
      out.overflow[i] = 1.0;
    } else {
      const std::size_t k = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), y) - edges.begin()) - 1;
      out.bins[i][k] = 1.0;
    }
    return out;
  }
  const double r = t - x;
  const auto& ue = U.edges;
  if (ue.front() > 0.0 || ue.back() < r) throw SpecError("potential estimate does not cover [0, t - x]");
  auto spread = [&](int target, const JumpLaw& law, double weight, double u) {
    double prev = law.cdf(u + edges.front());
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
      const double c = law.cdf(u + edges[b + 1]);
      out.bins[target][b] += weight * (c - prev);
      prev = c;
    }
    out.overflow[target] += weight * (1.0 - prev);
  };
  for (std::size_t k = 0; k + 1 < ue.size() && ue[k] < r; ++k) {
    const double lo = ue[k], hi = std::min(ue[k + 1], r);
    const double frac = (hi - lo) / (ue[k + 1] - ue[k]);
    const double u = r - 0.5 * (lo + hi);
    for (int p = 0; p < n; ++p) {
      const double m = U.cell(i, p, k) * frac;
      if (m == 0.0) continue;
      if (const auto& cp = ladder.jumps[p]) spread(p, cp->law, m * cp->rate, u);
      for (int j = 0; j < n; ++j)
        if (j != p && ladder.Q(p, j) > 0.0) spread(j, ladder.transition_law(p, j), m * ladder.Q(p, j), u);
    }
  }
  // creeping across the level
  std::size_t kr = static_cast<std::size_t>(std::upper_bound(ue.begin(), ue.end(), r) - ue.begin());
  kr = std::clamp<std::size_t>(kr, 1, ue.size() - 1) - 1;
  for (int j = 0; j < n; ++j) out.atoms[j] = ladder.drift[j] * U.cell(i, j, kr) / (ue[kr + 1] - ue[kr]);
  return out;
}

}  // namespace mapfluct
