#include "mapfluct/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

namespace mapfluct {

EmpiricalMeasure::EmpiricalMeasure(int n, std::vector<double> edges) : edges_(std::move(edges)) {
  if (edges_.size() < 2 || edges_.front() != 0.0) throw SpecError("empirical grid must start at 0");
  for (std::size_t k = 1; k < edges_.size(); ++k)
    if (!(edges_[k] > edges_[k - 1])) throw SpecError("empirical grid edges must increase strictly");
  zero_.assign(static_cast<std::size_t>(n), 0.0);
  over_.assign(static_cast<std::size_t>(n), 0.0);
  bins_.assign(static_cast<std::size_t>(n), std::vector<double>(edges_.size() - 1, 0.0));
}

std::size_t EmpiricalMeasure::slot(double y, int phase) const {
  const std::size_t K = edges_.size() - 1;
  const std::size_t base = static_cast<std::size_t>(phase) * (K + 2);
  if (y <= 0.0) return base;
  if (y >= edges_.back()) return base + K + 1;
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), y);
  return base + static_cast<std::size_t>(it - edges_.begin());
}

void EmpiricalMeasure::add(double y, int phase, double weight) {
  if (phase < 0 || phase >= n()) throw SpecError("phase out of range");
  total_ += weight;
  const std::size_t K = edges_.size() - 1;
  const std::size_t s = slot(y, phase) - static_cast<std::size_t>(phase) * (K + 2);
  if (s == 0)
    zero_[phase] += weight;
  else if (s == K + 1)
    over_[phase] += weight;
  else
    bins_[phase][s - 1] += weight;
}

void EmpiricalMeasure::merge(const EmpiricalMeasure& o) {
  if (o.edges_ != edges_ || o.n() != n()) throw SpecError("cannot merge measures on different grids");
  total_ += o.total_;
  for (int i = 0; i < n(); ++i) {
    zero_[i] += o.zero_[i];
    over_[i] += o.over_[i];
    for (std::size_t k = 0; k < bins_[i].size(); ++k) bins_[i][k] += o.bins_[i][k];
  }
}

OvershootLawEval EmpiricalMeasure::normalized() const {
  OvershootLawEval out;
  out.edges = edges_;
  const double s = total_ > 0.0 ? 1.0 / total_ : 0.0;
  for (int i = 0; i < n(); ++i) {
    out.atoms.push_back(zero_[i] * s);
    out.overflow.push_back(over_[i] * s);
    std::vector<double> b = bins_[i];
    for (auto& v : b) v *= s;
    out.bins.push_back(std::move(b));
  }
  out.total = 1.0;
  return out;
}

std::vector<double> slot_masses(const OvershootLawEval& law) {
  std::vector<double> v;
  for (int i = 0; i < law.n(); ++i) {
    v.push_back(law.atoms[i]);
    v.insert(v.end(), law.bins[i].begin(), law.bins[i].end());
    v.push_back(law.overflow[i]);
  }
  return v;
}

namespace {

OvershootLawEval coarsen(const OvershootLawEval& law, const std::vector<double>& edges) {
  OvershootLawEval out;
  out.edges = edges;
  out.atoms = law.atoms;
  out.total = law.total;
  for (int i = 0; i < law.n(); ++i) {
    std::vector<double> b(edges.size() - 1, 0.0);
    double over = law.overflow[i];
    std::size_t q = 0;
    for (std::size_t k = 0; k + 1 < law.edges.size(); ++k) {
      const double lo = law.edges[k];
      if (lo >= edges.back()) {
        over += law.bins[i][k];
        continue;
      }
      while (q + 1 < edges.size() - 1 && edges[q + 1] <= lo) ++q;
      b[q] += law.bins[i][k];
    }
    out.bins.push_back(std::move(b));
    out.overflow.push_back(over);
  }
  return out;
}

}  // namespace

double tv_distance(const OvershootLawEval& a, const OvershootLawEval& b) {
  if (a.n() != b.n()) throw SpecError("tv_distance: incompatible phase sets");
  if (a.edges != b.edges) {
    std::vector<double> common;
    std::set_intersection(a.edges.begin(), a.edges.end(), b.edges.begin(), b.edges.end(), std::back_inserter(common));
    if (common.size() < 2 || common.front() != 0.0) throw SpecError("tv_distance: grids share no common cells");
    return tv_distance(coarsen(a, common), coarsen(b, common));
  }
  const auto va = slot_masses(a), vb = slot_masses(b);
  double s = 0.0;
  for (std::size_t k = 0; k < va.size(); ++k) s += std::abs(va[k] - vb[k]);
  return 0.5 * s;
}

double tv_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b) { return tv_distance(a.normalized(), b.normalized()); }
double tv_distance(const EmpiricalMeasure& a, const OvershootLawEval& b) { return tv_distance(a.normalized(), b); }

}  // namespace mapfluct
