#pragma once

#include "mapfluct/stationary.hpp"

#include <vector>

namespace mapfluct {

// Histogram of (O, J) samples: an atom at exactly 0, left-closed bins and an
// overflow slot per phase.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure(int n, std::vector<double> edges);
  void add(double y, int phase, double weight = 1.0);
  void merge(const EmpiricalMeasure& o);
  int n() const { return static_cast<int>(zero_.size()); }
  const std::vector<double>& edges() const { return edges_; }
  double total() const { return total_; }
  double zero(int i) const { return zero_[i]; }
  const std::vector<double>& bins(int i) const { return bins_[i]; }
  double overflow(int i) const { return over_[i]; }
  // slot index: 0 atom, 1..K bins, K+1 overflow, offset by phase
  std::size_t slot(double y, int phase) const;
  std::size_t slots() const { return static_cast<std::size_t>(n()) * (edges_.size() + 1); }
  OvershootLawEval normalized() const;

 private:
  std::vector<double> edges_;
  std::vector<double> zero_, over_;
  std::vector<std::vector<double>> bins_;
  double total_ = 0.0;
};

// Flattened masses in slot order.
std::vector<double> slot_masses(const OvershootLawEval& law);

// Half the l1 distance over atoms, bins and overflow of every phase. Grids
// that differ are coarsened to their common edges first.
double tv_distance(const OvershootLawEval& a, const OvershootLawEval& b);
double tv_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b);
double tv_distance(const EmpiricalMeasure& a, const OvershootLawEval& b);

}  // namespace mapfluct
