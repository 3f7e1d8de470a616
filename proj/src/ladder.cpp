#include "mapfluct/ladder.hpp"

#include "mapfluct/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mapfluct {

LadderStats::LadderStats(int n)
    : time_at_max(static_cast<std::size_t>(n), 0.0),
      local_time(static_cast<std::size_t>(n), 0.0),
      jumps(static_cast<std::size_t>(n)),
      switch_counts(static_cast<std::size_t>(n), std::vector<long>(static_cast<std::size_t>(n), 0)) {}

void LadderStats::merge(const LadderStats& o) {
  if (n() == 0) {
    *this = o;
    return;
  }
  for (int i = 0; i < n(); ++i) {
    time_at_max[i] += o.time_at_max[i];
    local_time[i] += o.local_time[i];
    jumps[i].insert(jumps[i].end(), o.jumps[i].begin(), o.jumps[i].end());
    for (int j = 0; j < n(); ++j) switch_counts[i][j] += o.switch_counts[i][j];
  }
  transitions.insert(transitions.end(), o.transitions.begin(), o.transitions.end());
}

CreepingLadderTracker::CreepingLadderTracker(LadderStats& out, double x0, int phase0)
    : out_(&out), max_(x0), max_phase_(phase0) {}

void CreepingLadderTracker::piece(double t0, double t1, double x0, double x1, int phase) {
  if (!(x1 > x0)) return;
  if (at_max_) {
    out_->time_at_max[phase] += t1 - t0;
    out_->local_time[phase] += x1 - x0;
    max_ = x1;
    return;
  }
  if (x1 < max_) return;
  // creeps back up to the old maximum inside the piece
  if (phase != max_phase_) {
    out_->transitions.push_back({max_phase_, phase, 0.0});
    out_->switch_counts[max_phase_][phase] += 1;
  }
  out_->time_at_max[phase] += (t1 - t0) * (x1 - max_) / (x1 - x0);
  out_->local_time[phase] += x1 - max_;
  max_ = x1;
  max_phase_ = phase;
  at_max_ = true;
}

void CreepingLadderTracker::jump(double x_before, double x_after, int phase_before, int phase_after) {
  (void)x_before;
  (void)phase_before;
  if (x_after >= max_) {
    const double size = x_after - max_;
    if (phase_after == max_phase_) {
      if (size > 0.0) out_->jumps[phase_after].push_back(size);
    } else {
      out_->transitions.push_back({max_phase_, phase_after, size});
      out_->switch_counts[max_phase_][phase_after] += 1;
    }
    max_ = x_after;
    max_phase_ = phase_after;
    at_max_ = true;
  } else {
    at_max_ = false;
  }
}

void CreepingLadderTracker::step(const Step& s) {
  piece(s.t0, s.t1, s.x0, s.x1_pre, s.phase);
  if (s.kind == StepKind::Jump || s.kind == StepKind::Switch) jump(s.x1_pre, s.x1(), s.phase, s.phase_after);
}

LadderStats extract_ladder_stats(const MapPath& path, int n) {
  for (const auto& p : path.pieces)
    if (p.diffusive || (p.t1 > p.t0 && !(p.x1 > p.x0)))
      throw SpecError("ladder extraction needs the creeping class (positive drift, no Gaussian part)");
  LadderStats st(n);
  if (path.pieces.empty()) return st;
  CreepingLadderTracker tr(st, path.pieces.front().x0, path.pieces.front().phase);
  for (std::size_t k = 0; k < path.pieces.size(); ++k) {
    const auto& p = path.pieces[k];
    tr.piece(p.t0, p.t1, p.x0, p.x1, p.phase);
    if (k + 1 < path.pieces.size()) {
      const auto& q = path.pieces[k + 1];
      if (q.x0 != p.x1 || q.phase != p.phase) tr.jump(p.x1, q.x0, p.phase, q.phase);
    }
  }
  return st;
}

namespace {

std::vector<double> default_bins() {
  std::vector<double> e;
  for (int k = 0; k <= 100; ++k) e.push_back(0.1 * k);
  return e;
}

// starting phase of path k: deterministic stratification over pi
int stratified_phase(std::size_t k, std::size_t n_paths, const Eigen::VectorXd& pi) {
  const double u = (static_cast<double>(k) + 0.5) / static_cast<double>(n_paths);
  double acc = 0.0;
  for (int i = 0; i < pi.size(); ++i) {
    acc += pi(i);
    if (u < acc) return i;
  }
  return static_cast<int>(pi.size()) - 1;
}

struct Binned {
  std::vector<double> counts;
  double zero = 0.0, over = 0.0, over_sum = 0.0, total = 0.0;
};

Binned bin_sizes(const std::vector<double>& sizes, const std::vector<double>& edges) {
  Binned b;
  b.counts.assign(edges.size() - 1, 0.0);
  for (double s : sizes) {
    b.total += 1.0;
    if (s == 0.0) {
      b.zero += 1.0;
      continue;
    }
    if (s >= edges.back()) {
      b.over += 1.0;
      b.over_sum += s;
      continue;
    }
    auto it = std::upper_bound(edges.begin(), edges.end(), s);
    const std::size_t k = static_cast<std::size_t>(it - edges.begin()) - 1;
    b.counts[std::min(k, b.counts.size() - 1)] += 1.0;
  }
  return b;
}

JumpLaw law_from_bins(const Binned& b, const std::vector<double>& edges) {
  std::vector<double> w;
  for (double c : b.counts) w.push_back(c / b.total);
  const double over_at = b.over > 0.0 ? b.over_sum / b.over : edges.back();
  return JumpLaw::histogram(edges, w, b.zero / b.total, b.over / b.total, over_at);
}

BinnedMeasure measure_from_bins(const Binned& b, const std::vector<double>& edges, double local) {
  BinnedMeasure m;
  m.edges = edges;
  for (double c : b.counts) {
    m.mass.push_back(c / local);
    m.se.push_back(std::sqrt(c) / local);
  }
  m.atom_zero = b.zero / local;
  m.atom_zero_se = std::sqrt(b.zero) / local;
  m.overflow = b.over / local;
  return m;
}

}  // namespace

LadderEstimate estimate_ladder_spec(const MapSpec& spec, const LadderEstimateOptions& opt) {
  const WalkerModel model = WalkerModel::from_map(spec, opt.sim.eps, opt.sim.gaussian_refinement);
  if (!model.creeping_class())
    throw SpecError("ladder estimation needs the creeping class (positive drift, no Gaussian part, in every phase)");
  const int n = spec.n();
  const Eigen::VectorXd pi = stationary_of_Q(spec.Q);
  const std::vector<double> edges = opt.bins.empty() ? default_bins() : opt.bins;
  LadderStats stats = chunked_reduce<LadderStats>(
      opt.n_paths, 256, opt.workers, [n] { return LadderStats(n); },
      [&](std::size_t b, std::size_t e, LadderStats& acc) {
        for (std::size_t k = b; k < e; ++k) {
          Rng rng(opt.seed, k);
          const int p0 = opt.start_phase >= 0 ? opt.start_phase : stratified_phase(k, opt.n_paths, pi);
          Walker w(model, 0.0, p0, rng);
          CreepingLadderTracker tr(acc, 0.0, p0);
          while (w.alive() && w.time() < opt.horizon) tr.step(w.next(opt.horizon));
        }
      },
      [](LadderStats& a, const LadderStats& b) { a.merge(b); });

  LadderEstimate est;
  est.spec.drift.assign(static_cast<std::size_t>(n), 1.0);
  est.spec.killing.assign(static_cast<std::size_t>(n), 0.0);
  est.spec.jumps.assign(static_cast<std::size_t>(n), std::nullopt);
  est.spec.Q = Eigen::MatrixXd::Zero(n, n);
  est.q_se = Eigen::MatrixXd::Zero(n, n);
  est.spec.F.assign(static_cast<std::size_t>(n), std::vector<std::optional<JumpLaw>>(static_cast<std::size_t>(n)));
  est.transition_measure.assign(static_cast<std::size_t>(n), std::vector<BinnedMeasure>(static_cast<std::size_t>(n)));
  est.ladder_events.assign(static_cast<std::size_t>(n), 0);
  std::vector<std::vector<std::vector<double>>> tsizes(
      static_cast<std::size_t>(n), std::vector<std::vector<double>>(static_cast<std::size_t>(n)));
  for (const auto& t : stats.transitions) tsizes[t.from][t.to].push_back(t.size);
  for (int i = 0; i < n; ++i) {
    const double L = stats.local_time[i];
    if (!(L > 0.0)) throw ComputeError("no local time at the maximum observed in phase " + std::to_string(i));
    const Binned b = bin_sizes(stats.jumps[i], edges);
    est.jump_measure.push_back(measure_from_bins(b, edges, L));
    est.ladder_events[i] += static_cast<long>(b.total);
    if (b.total > 0.0) est.spec.jumps[i] = CompoundPoisson{b.total / L, law_from_bins(b, edges)};
    double out_rate = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto& sz = tsizes[i][j];
      const Binned bt = bin_sizes(sz, edges);
      est.transition_measure[i][j] = measure_from_bins(bt, edges, L);
      est.ladder_events[i] += static_cast<long>(bt.total);
      if (bt.total > 0.0) {
        est.spec.Q(i, j) = bt.total / L;
        est.q_se(i, j) = std::sqrt(bt.total) / L;
        est.spec.F[i][j] = law_from_bins(bt, edges);
        out_rate += bt.total / L;
      }
    }
    est.spec.Q(i, i) = -out_rate;
    if (est.ladder_events[i] < opt.min_events) est.low_count_warning = true;
  }
  est.stats = std::move(stats);
  return est;
}

EpochPath simulate_epochs(const WalkerModel& model, int phase0, double depth, double horizon, Rng& rng) {
  EpochPath ep;
  ep.height.push_back(0.0);
  ep.phase.push_back(phase0);
  double M = 0.0;
  int pM = phase0;
  Walker w(model, 0.0, phase0, rng);
  while (true) {
    if (!w.alive()) {
      ep.killed = true;
      break;
    }
    if (w.time() >= horizon) {
      ep.censored = true;
      break;
    }
    const Step s = w.next(horizon);
    if (s.kind == StepKind::Jump || s.kind == StepKind::Switch) {
      const double xa = s.x1();
      if (xa > M || (xa >= M && s.phase_after != pM)) {
        M = xa;
        pM = s.phase_after;
        ep.height.push_back(M);
        ep.phase.push_back(pM);
      }
    }
    if (w.alive() && w.value() < M - depth) {
      ep.killed = true;
      break;
    }
  }
  return ep;
}

EpochLadderEstimate estimate_epoch_ladder(const MapSpec& spec, const EpochOptions& opt) {
  const WalkerModel model = WalkerModel::from_map(spec, opt.sim.eps, opt.sim.gaussian_refinement);
  if (!model.nonpositive_class())
    throw SpecError("epoch ladder estimation needs drift <= 0 and no Gaussian part in every phase");
  const int n = spec.n();
  const Eigen::VectorXd pi = stationary_of_Q(spec.Q);
  const std::vector<double> edges = opt.bins.empty() ? default_bins() : opt.bins;
  struct Acc {
    std::vector<std::vector<std::vector<double>>> sizes;  // [from][to]
    std::vector<long> killed, censored;
  };
  const auto make = [n] {
    Acc a;
    a.sizes.assign(static_cast<std::size_t>(n), std::vector<std::vector<double>>(static_cast<std::size_t>(n)));
    a.killed.assign(static_cast<std::size_t>(n), 0);
    a.censored.assign(static_cast<std::size_t>(n), 0);
    return a;
  };
  Acc acc = chunked_reduce<Acc>(
      opt.n_paths, 256, opt.workers, make,
      [&](std::size_t b, std::size_t e, Acc& a) {
        for (std::size_t k = b; k < e; ++k) {
          Rng rng(opt.seed, k);
          const EpochPath ep = simulate_epochs(model, stratified_phase(k, opt.n_paths, pi), opt.depth, opt.horizon, rng);
          for (std::size_t m = 0; m + 1 < ep.height.size(); ++m)
            a.sizes[ep.phase[m]][ep.phase[m + 1]].push_back(ep.height[m + 1] - ep.height[m]);
          if (ep.killed) a.killed[ep.phase.back()] += 1;
          if (ep.censored) a.censored[ep.phase.back()] += 1;
        }
      },
      [n](Acc& a, const Acc& b) {
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) a.sizes[i][j].insert(a.sizes[i][j].end(), b.sizes[i][j].begin(), b.sizes[i][j].end());
          a.killed[i] += b.killed[i];
          a.censored[i] += b.censored[i];
        }
      });
  EpochLadderEstimate est;
  est.spec.drift.assign(static_cast<std::size_t>(n), 0.0);
  est.spec.killing.assign(static_cast<std::size_t>(n), 0.0);
  est.spec.jumps.assign(static_cast<std::size_t>(n), std::nullopt);
  est.spec.Q = Eigen::MatrixXd::Zero(n, n);
  est.spec.F.assign(static_cast<std::size_t>(n), std::vector<std::optional<JumpLaw>>(static_cast<std::size_t>(n)));
  est.censored = acc.censored;
  for (int i = 0; i < n; ++i) {
    double N = static_cast<double>(acc.killed[i]);
    for (int j = 0; j < n; ++j) N += static_cast<double>(acc.sizes[i][j].size());
    est.steps.push_back(static_cast<long>(N));
    if (!(N > 0.0)) throw ComputeError("no ladder epochs observed in phase " + std::to_string(i));
    est.spec.killing[i] = acc.killed[i] / N;
    double out_rate = 0.0;
    for (int j = 0; j < n; ++j) {
      const auto& sz = acc.sizes[i][j];
      if (sz.empty()) continue;
      const Binned b = bin_sizes(sz, edges);
      if (j == i) {
        est.spec.jumps[i] = CompoundPoisson{b.total / N, law_from_bins(b, edges)};
      } else {
        est.spec.Q(i, j) = b.total / N;
        est.spec.F[i][j] = law_from_bins(b, edges);
        out_rate += b.total / N;
      }
    }
    est.spec.Q(i, i) = -out_rate;
  }
  return est;
}

double PotentialEstimate::se_of(int i, const std::vector<std::pair<std::size_t, double>>& weights) const {
  const auto& C = cov[static_cast<std::size_t>(i)];
  double v = 0.0;
  for (const auto& [a, wa] : weights)
    for (const auto& [b, wb] : weights) v += wa * wb * C(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  return std::sqrt(std::max(v, 0.0) / static_cast<double>(paths[static_cast<std::size_t>(i)]));
}

double PotentialEstimate::cum_at(int i, int j, double x) const {
  const auto& c = cum[i][j];
  if (x <= edges.front()) return c.front();
  if (x >= edges.back()) return c.back();
  auto it = std::upper_bound(edges.begin(), edges.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - edges.begin()) - 1;
  const double f = (x - edges[k]) / (edges[k + 1] - edges[k]);
  return c[k] + f * (c[k + 1] - c[k]);
}

namespace {

// Accumulates sum and cross products of per-path cumulative vectors.
struct MomentAcc {
  Eigen::VectorXd sum, sq;
  Eigen::MatrixXd cross;  // empty unless the full covariance is wanted
  std::size_t count = 0;
};

template <class PerPath>
PotentialEstimate potential_from_paths(int n, const std::vector<double>& edges, std::size_t n_paths,
                                       std::uint64_t seed, int workers, bool full_cov, PerPath per_path) {
  if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end())) throw SpecError("potential grid needs sorted edges");
  const std::size_t K = edges.size();
  const Eigen::Index dim = static_cast<Eigen::Index>(static_cast<std::size_t>(n) * K);
  PotentialEstimate est;
  est.n = n;
  est.edges = edges;
  for (int i = 0; i < n; ++i) {
    MomentAcc acc = chunked_reduce<MomentAcc>(
        n_paths, 256, workers,
        [dim, full_cov] {
          MomentAcc a;
          a.sum = Eigen::VectorXd::Zero(dim);
          a.sq = Eigen::VectorXd::Zero(dim);
          if (full_cov) a.cross = Eigen::MatrixXd::Zero(dim, dim);
          return a;
        },
        [&](std::size_t b, std::size_t e, MomentAcc& a) {
          Eigen::VectorXd cells(dim), v(dim);
          for (std::size_t k = b; k < e; ++k) {
            Rng rng(seed, static_cast<std::uint64_t>(i) * 1000003ULL + k);
            cells.setZero();
            per_path(i, rng, cells);
            // cumulative along each target phase block, cells[j*K + k] is [e_k, e_{k+1})
            for (int j = 0; j < n; ++j) {
              double run = 0.0;
              for (std::size_t q = 0; q < K; ++q) {
                v(static_cast<Eigen::Index>(static_cast<std::size_t>(j) * K + q)) = run;
                run += cells(static_cast<Eigen::Index>(static_cast<std::size_t>(j) * K + q));
              }
            }
            a.sum += v;
            a.sq += v.cwiseProduct(v);
            if (full_cov) a.cross.selfadjointView<Eigen::Lower>().rankUpdate(v);
            a.count += 1;
          }
        },
        [full_cov](MomentAcc& a, const MomentAcc& b) {
          a.sum += b.sum;
          a.sq += b.sq;
          if (full_cov) a.cross += b.cross;
          a.count += b.count;
        });
    const double N = static_cast<double>(acc.count);
    const Eigen::VectorXd mean = acc.sum / N;
    const double unbias = N / std::max(N - 1.0, 1.0);
    Eigen::MatrixXd cov;
    if (full_cov) {
      Eigen::MatrixXd cross = acc.cross.selfadjointView<Eigen::Lower>();
      cov = (cross / N - mean * mean.transpose()) * unbias;
    } else {
      cov = ((acc.sq / N - mean.cwiseProduct(mean)) * unbias).asDiagonal();
    }
    est.cov.push_back(cov);
    est.paths.push_back(acc.count);
    std::vector<std::vector<double>> per_j;
    for (int j = 0; j < n; ++j) {
      std::vector<double> c(K);
      for (std::size_t q = 0; q < K; ++q) c[q] = mean(static_cast<Eigen::Index>(static_cast<std::size_t>(j) * K + q));
      per_j.push_back(c);
    }
    est.cum.push_back(per_j);
  }
  return est;
}

void add_span(Eigen::VectorXd& cells, const std::vector<double>& edges, int phase, double a, double b, double weight) {
  // weight per unit length on [a, b)
  const std::size_t K = edges.size();
  if (b <= edges.front() || a >= edges.back()) return;
  a = std::max(a, edges.front());
  b = std::min(b, edges.back());
  auto it = std::upper_bound(edges.begin(), edges.end(), a);
  std::size_t k = static_cast<std::size_t>(it - edges.begin()) - 1;
  for (; k + 1 < K && edges[k] < b; ++k) {
    const double lo = std::max(a, edges[k]), hi = std::min(b, edges[k + 1]);
    if (hi > lo) cells(static_cast<Eigen::Index>(static_cast<std::size_t>(phase) * K + k)) += weight * (hi - lo);
  }
}

void add_point(Eigen::VectorXd& cells, const std::vector<double>& edges, int phase, double x, double mass) {
  if (x < edges.front() || x >= edges.back()) return;
  auto it = std::upper_bound(edges.begin(), edges.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - edges.begin()) - 1;
  cells(static_cast<Eigen::Index>(static_cast<std::size_t>(phase) * edges.size() + k)) += mass;
}

}  // namespace

PotentialEstimate estimate_potential_measure(const LadderSpec& ladder, const std::vector<double>& edges,
                                             const PotentialOptions& opt) {
  const WalkerModel model = WalkerModel::from_ladder(ladder);
  const double top = edges.back();
  return potential_from_paths(ladder.n(), edges, opt.n_paths, opt.seed, opt.workers, opt.covariance,
                              [&](int i, Rng& rng, Eigen::VectorXd& cells) {
                                Walker w(model, 0.0, i, rng);
                                while (w.alive() && w.value() < top) {
                                  if (w.time() > 1e9) throw ComputeError("ladder stalled");
                                  const Step s = w.next(kInf);
                                  const double d = model.phase(s.phase).drift;
                                  if (d > 0.0)
                                    add_span(cells, edges, s.phase, s.x0, s.x1_pre, 1.0 / d);
                                  else
                                    add_point(cells, edges, s.phase, s.x0, s.t1 - s.t0);
                                }
                              });
}

PotentialEstimate estimate_epoch_potential(const MapSpec& spec, const std::vector<double>& edges,
                                           const EpochOptions& opt) {
  const WalkerModel model = WalkerModel::from_map(spec, opt.sim.eps, opt.sim.gaussian_refinement);
  if (!model.nonpositive_class())
    throw SpecError("epoch potential needs drift <= 0 and no Gaussian part in every phase");
  return potential_from_paths(spec.n(), edges, opt.n_paths, opt.seed, opt.workers, opt.n_paths > 0 && edges.size() * spec.n() <= 400,
                              [&](int i, Rng& rng, Eigen::VectorXd& cells) {
                                const EpochPath ep = simulate_epochs(model, i, opt.depth, opt.horizon, rng);
                                for (std::size_t m = 0; m < ep.height.size(); ++m)
                                  add_point(cells, edges, ep.phase[m], ep.height[m], 1.0);
                              });
}

std::vector<OvershootSample> simulate_ladder_overshoot(const LadderSpec& ladder, const std::vector<double>& levels,
                                                       Rng& rng, double x0, int phase0) {
  const WalkerModel model = WalkerModel::from_ladder(ladder);
  return overshoot_series(model, levels, rng, 1e12, x0, phase0);
}

}  // namespace mapfluct
