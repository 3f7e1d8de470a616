#include "mapfluct/ergodicity.hpp"

#include "mapfluct/parallel.hpp"
#include "mapfluct/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace mapfluct {

std::vector<double> default_law_edges(const LadderSpec& ladder, int bins) {
  const InvariantMeasure chi(ladder);
  if (!chi.finite_mass()) throw ComputeError("no stationary distribution: the ladder height has infinite mean");
  double R = 0.5;
  for (; R < 1e4; R += 0.5) {
    const OvershootLawEval one = chi.discretize({0.0, R}, true);
    double over = 0.0;
    for (double o : one.overflow) over += o;
    if (over <= 1e-4) break;
  }
  std::vector<double> e;
  for (int k = 0; k <= bins; ++k) e.push_back(R * k / bins);
  return e;
}

double tv_noise_floor(const OvershootLawEval& rho, double n) {
  // de Moivre's mean absolute deviation of a binomial count, per slot
  double s = 0.0;
  for (double p : slot_masses(rho)) {
    if (p <= 0.0 || p >= 1.0) continue;
    const double m = std::floor(n * p) + 1.0;
    if (m > n) continue;
    const double log_c = std::lgamma(n + 1.0) - std::lgamma(m + 1.0) - std::lgamma(n - m + 1.0);
    const double mad = 2.0 * m * std::exp(log_c + m * std::log(p) + (n - m + 1.0) * std::log1p(-p));
    s += mad / n;
  }
  return 0.5 * s;
}

namespace {

template <class T>
T mag(T v) { return v < T(0) ? -v : v; }

template <class T>
struct Limits {
  static T eps() { return std::numeric_limits<T>::epsilon(); }
};
#ifdef __SIZEOF_FLOAT128__
template <>
struct Limits<__float128> {
  static __float128 eps() { return static_cast<__float128>(1.0L) / static_cast<__float128>(5192296858534827628530496329220096.0L); }  // 2^-112
};
#endif

template <class Real>
LatticeCurve lattice_curve(const LadderSpec& ladder, double x, int start, const std::vector<double>& ts, double h,
                           std::size_t K) {
  const int n = ladder.n();
  const std::size_t W = K + 1;
  // land[i][j][m]: one step from the maximum in phase i ends at (m h, j).
  std::vector<std::vector<std::vector<Real>>> land(n, std::vector<std::vector<Real>>(n, std::vector<Real>(W, Real(0))));
  for (int i = 0; i < n; ++i) {
    const double c = ladder.jump_rate(i);
    double q = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) q += ladder.Q(i, j);
    const double total = c + q, d = ladder.drift[i];
    if (total <= 0.0 && d <= 0.0) throw SpecError("phase " + std::to_string(i) + " neither moves nor leaves");
    const Real p_event = d > 0.0 ? Real(-std::expm1(-static_cast<long double>(total) * h / d)) : Real(1);
    land[i][i][0] += Real(1) - p_event;
    auto spread = [&](const JumpLaw& law, Real w, int j) {
      Real prev = Real(0);
      for (std::size_t m = 0; m < K; ++m) {
        const Real cm = static_cast<Real>(law.cdf(static_cast<double>(m + 1) * h));
        land[i][j][m] += w * (cm - prev);
        prev = cm;
      }
      land[i][j][K] += w * (Real(1) - prev);
    };
    if (total > 0.0) {
      if (c > 0.0) spread(ladder.jumps[i]->law, p_event * Real(c / total), i);
      for (int j = 0; j < n; ++j)
        if (j != i && ladder.Q(i, j) > 0.0) spread(ladder.transition_law(i, j), p_event * Real(ladder.Q(i, j) / total), j);
    }
    // exact row sums keep the chain stochastic at this precision
    Real row = Real(0);
    for (int j = 0; j < n; ++j)
      for (Real v : land[i][j]) row += v;
    for (int j = 0; j < n; ++j)
      for (Real& v : land[i][j]) v /= row;
  }
  using Vec = std::vector<std::vector<Real>>;  // [phase][level]
  auto step = [&](const Vec& v) {
    Vec out(n, std::vector<Real>(W, Real(0)));
    for (int j = 0; j < n; ++j)
      for (std::size_t k = 0; k < K; ++k) out[j][k] = v[j][k + 1];
    for (int i = 0; i < n; ++i) {
      const Real a = v[i][0];
      if (a == Real(0)) continue;
      for (int j = 0; j < n; ++j)
        for (std::size_t m = 0; m < W; ++m) out[j][m] += a * land[i][j][m];
    }
    return out;
  };
  std::vector<Vec> tails(n, Vec(n, std::vector<Real>(W, Real(0))));
  auto l1 = [&](const Vec& v) {
    Real s = Real(0);
    for (const auto& row : v)
      for (Real x : row) s += mag(x);
    return s;
  };
  // stationary law: pi(k, j) = sum_i a_i sum_{m >= k} land[i][j][m] with a
  // stationary for the chain of phases seen at the maximum
  // a (M - I) = 0, sum a = 1, by elimination on the transposed system
  std::vector<std::vector<Real>> A(n + 1, std::vector<Real>(n + 1, Real(0)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Real acc = Real(0);
      for (std::size_t m = W; m-- > 0;) {
        acc += land[i][j][m];
        tails[i][j][m] = acc;
      }
      A[j][i] = acc - (i == j ? Real(1) : Real(0));
    }
  // replace the last balance equation (redundant) by the normalization
  for (int i = 0; i < n; ++i) A[n - 1][i] = Real(1);
  A[n - 1][n] = Real(1);
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (mag(A[r][c]) > mag(A[piv][c])) piv = r;
    std::swap(A[c], A[piv]);
    if (A[c][c] == Real(0)) throw ComputeError("phase chain at the maximum is reducible");
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      const Real f = A[r][c] / A[c][c];
      for (int k = c; k <= n; ++k) A[r][k] -= f * A[c][k];
    }
  }
  std::vector<Real> a(n);
  for (int i = 0; i < n; ++i) a[i] = A[i][n] / A[i][i];
  Vec pi(n, std::vector<Real>(W, Real(0)));
  for (int j = 0; j < n; ++j)
    for (std::size_t k = 0; k < W; ++k)
      for (int i = 0; i < n; ++i) pi[j][k] += a[i] * tails[i][j][k];
  const Real mass = l1(pi);
  for (auto& row : pi)
    for (Real& v : row) v /= mass;
  LatticeCurve out;
  out.h = h;
  out.range = static_cast<double>(K) * h;
  out.states = static_cast<std::size_t>(n) * W;
  Real resid = Real(0);
  {
    const Vec next = step(pi);
    for (int j = 0; j < n; ++j)
      for (std::size_t k = 0; k < W; ++k) resid += mag(next[j][k] - pi[j][k]);
  }
  out.stationary_residual = static_cast<double>(resid);
  Vec delta = pi;
  for (auto& row : delta)
    for (Real& v : row) v = -v;
  delta[start][std::min(K, static_cast<std::size_t>(std::llround(x / h)))] += Real(1);
  // P is an l1 contraction, so per-step errors (rounding, and the residual of
  // the computed stationary law) add up at most linearly in the mass moved
  const Real eps = Limits<Real>::eps();
  Real moved = l1(delta);
  long done = 0;
  for (double t : ts) {
    const long target = std::llround(t / h);
    for (; done < target; ++done) {
      delta = step(delta);
      moved += l1(delta);
    }
    const Real err = (resid + Real(4) * eps) * moved + eps;
    out.points.push_back({t, static_cast<double>(Real(0.5) * l1(delta)), static_cast<double>(err), 0.0});
  }
  return out;
}


}  // namespace

LatticeCurve tv_decay_lattice(const LadderSpec& ladder, double x, int start, const std::vector<double>& ts,
                              const LatticeOptions& opt) {
  const int n = ladder.n();
  if (start < 0 || start >= n) throw SpecError("start phase out of range");
  if (!(opt.h > 0.0)) throw SpecError("lattice step must be > 0");
  if (ts.empty() || !std::is_sorted(ts.begin(), ts.end()) || ts.front() < 0.0)
    throw SpecError("time grid must be nonempty, nonnegative and sorted");
  for (double k : ladder.killing)
    if (k > 0.0) throw ComputeError("no stationary distribution: the ladder is killed");
  const InvariantMeasure chi(ladder);
  if (!chi.finite_mass()) throw ComputeError("no stationary distribution: the ladder height has infinite mean");
  double R = opt.range;
  if (R <= 0.0) {
    for (R = 5.0; R < opt.max_range; R += 5.0) {
      const OvershootLawEval one = chi.discretize({0.0, R}, true);
      double over = 0.0;
      for (double o : one.overflow) over += o;
      if (over <= opt.tail) break;
    }
    R = std::min(R, opt.max_range);
  }
  R = std::max(R, x + opt.h);
  const double h = opt.h;
  const auto K = static_cast<std::size_t>(std::ceil(R / h - 1e-9));
  // quadruple precision follows fast decays to ~1e-30 when the grid is small
  const double work = static_cast<double>(n) * static_cast<double>(K + 1) * (ts.back() / h);
#ifdef __SIZEOF_FLOAT128__
  if (work <= opt.quad_work) return lattice_curve<__float128>(ladder, x, start, ts, h, K);
#endif
  (void)work;
  return lattice_curve<long double>(ladder, x, start, ts, h, K);
}

namespace {

double tv_counts(const std::vector<double>& counts, const std::vector<double>& ref, double n) {
  double s = 0.0;
  for (std::size_t k = 0; k < ref.size(); ++k) s += std::abs(counts[k] / n - ref[k]);
  return 0.5 * s;
}

// multinomial resample of n draws from the empirical frequencies
std::vector<double> resample(const std::vector<double>& counts, double n, Rng& rng) {
  std::vector<double> out(counts.size(), 0.0);
  long left = std::lround(n);
  double mass_left = n;
  for (std::size_t k = 0; k < counts.size() && left > 0; ++k) {
    if (counts[k] <= 0.0) continue;
    const double p = std::min(1.0, counts[k] / mass_left);
    std::binomial_distribution<long> bin(left, p);
    const long c = bin(rng);
    out[k] = static_cast<double>(c);
    left -= c;
    mass_left -= counts[k];
  }
  return out;
}

void require_sorted(const std::vector<double>& ts) {
  if (ts.empty() || !std::is_sorted(ts.begin(), ts.end()) || ts.front() < 0.0)
    throw SpecError("time grid must be nonempty, nonnegative and sorted");
}

}  // namespace

std::vector<TvPoint> tv_decay_curve(const LadderSpec& ladder, double x, int i, const std::vector<double>& ts,
                                    const TvOptions& opt) {
  require_sorted(ts);
  const std::vector<double> edges = opt.edges.empty() ? default_law_edges(ladder) : opt.edges;
  const OvershootLawEval rho = stationary_distribution(ladder, edges);
  const std::vector<double> ref = slot_masses(rho);
  const WalkerModel model = WalkerModel::from_ladder(ladder);
  const EmpiricalMeasure grid(ladder.n(), edges);
  const std::size_t S = grid.slots(), T = ts.size();
  std::vector<double> counts = chunked_reduce<std::vector<double>>(
      opt.n_paths, 1024, opt.workers, [&] { return std::vector<double>(S * T, 0.0); },
      [&](std::size_t b, std::size_t e, std::vector<double>& acc) {
        for (std::size_t k = b; k < e; ++k) {
          Rng rng(opt.seed, k);
          const auto samples = overshoot_series(model, ts, rng, 1e12, x, i);
          for (std::size_t q = 0; q < T; ++q) {
            if (!samples[q].ok()) throw ComputeError("overshoot path killed or censored before level " + std::to_string(ts[q]));
            acc[q * S + grid.slot(samples[q].overshoot, samples[q].phase)] += 1.0;
          }
        }
      },
      [](std::vector<double>& a, const std::vector<double>& b) {
        for (std::size_t k = 0; k < a.size(); ++k) a[k] += b[k];
      });
  const double n = static_cast<double>(opt.n_paths);
  const double floor = tv_noise_floor(rho, n);
  std::vector<TvPoint> out;
  for (std::size_t q = 0; q < T; ++q) {
    const std::vector<double> c(counts.begin() + static_cast<std::ptrdiff_t>(q * S),
                                counts.begin() + static_cast<std::ptrdiff_t>((q + 1) * S));
    TvPoint p;
    p.t = ts[q];
    p.tv = tv_counts(c, ref, n);
    p.floor = floor;
    Rng rng(opt.seed ^ 0x5eedb007ULL, q);
    double s1 = 0.0, s2 = 0.0;
    for (int r = 0; r < opt.bootstrap; ++r) {
      const double v = tv_counts(resample(c, n, rng), ref, n);
      s1 += v;
      s2 += v * v;
    }
    if (opt.bootstrap > 1) {
      const double B = opt.bootstrap;
      p.se = std::sqrt(std::max(s2 / B - (s1 / B) * (s1 / B), 0.0) * B / (B - 1.0));
    }
    out.push_back(p);
  }
  return out;
}

std::string to_string(RateModel m) { return m == RateModel::Exponential ? "exponential" : "polynomial"; }

RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& value, const std::vector<double>& se,
                 RateModel model, std::size_t min_points) {
  if (t.size() != value.size() || t.size() != se.size()) throw SpecError("fit_rate: arrays differ in length");
  std::vector<double> xs, ys;
  RateFit fit;
  fit.model = model;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!(value[k] > 3.0 * se[k]) || !(value[k] > 0.0)) continue;
    if (model == RateModel::Polynomial && !(t[k] > 0.0)) continue;
    xs.push_back(model == RateModel::Exponential ? t[k] : std::log(t[k]));
    ys.push_back(std::log(value[k]));
    if (fit.points == 0) fit.t_lo = t[k];
    fit.t_hi = t[k];
    fit.points += 1;
  }
  if (fit.points < min_points)
    throw ComputeError("too few points above noise for a rate fit (" + std::to_string(fit.points) + " < " +
                       std::to_string(min_points) + ")");
  const double N = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= N;
  my /= N;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  if (!(sxx > 0.0)) throw ComputeError("rate fit needs at least two distinct times");
  const double slope = sxy / sxx;
  fit.intercept = my - slope * mx;
  fit.rate = model == RateModel::Exponential ? -slope : slope;
  fit.r2 = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return fit;
}

RateFit fit_rate(const std::vector<TvPoint>& curve, RateModel model, std::size_t min_points) {
  std::vector<double> t, v, s;
  for (const auto& p : curve) {
    t.push_back(p.t);
    v.push_back(p.tv);
    s.push_back(p.se);
  }
  return fit_rate(t, v, s, model, min_points);
}

std::vector<BetaPoint> beta_mixing_stationary(const LadderSpec& ladder, const std::vector<double>& ts,
                                              const BetaOptions& opt) {
  require_sorted(ts);
  if (opt.outer < 2 || opt.inner < 1) throw SpecError("beta mixing needs at least 2 starts and 1 inner path");
  const std::vector<double> edges = opt.edges.empty() ? default_law_edges(ladder) : opt.edges;
  const OvershootLawEval rho = stationary_distribution(ladder, edges);
  const std::vector<double> ref = slot_masses(rho);
  const InvariantMeasure chi(ladder);
  const WalkerModel model = WalkerModel::from_ladder(ladder);
  const EmpiricalMeasure grid(ladder.n(), edges);
  const std::size_t S = grid.slots(), T = ts.size();
  using Rows = std::vector<std::vector<double>>;
  const Rows rows = chunked_reduce<Rows>(
      opt.outer, 1, opt.workers, [] { return Rows{}; },
      [&](std::size_t b, std::size_t e, Rows& acc) {
        for (std::size_t s = b; s < e; ++s) {
          Rng start_rng(opt.seed, s);
          const auto [y, ph] = chi.sample(start_rng);
          std::vector<double> counts(S * T, 0.0);
          for (std::size_t k = 0; k < opt.inner; ++k) {
            Rng rng(opt.seed ^ 0x9e3779b97f4a7c15ULL, s * opt.inner + k);
            const auto samples = overshoot_series(model, ts, rng, 1e12, y, ph);
            for (std::size_t q = 0; q < T; ++q) counts[q * S + grid.slot(samples[q].overshoot, samples[q].phase)] += 1.0;
          }
          std::vector<double> tv(T);
          for (std::size_t q = 0; q < T; ++q) {
            const std::vector<double> c(counts.begin() + static_cast<std::ptrdiff_t>(q * S),
                                        counts.begin() + static_cast<std::ptrdiff_t>((q + 1) * S));
            tv[q] = tv_counts(c, ref, static_cast<double>(opt.inner));
          }
          acc.push_back(std::move(tv));
        }
      },
      [](Rows& a, const Rows& b) { a.insert(a.end(), b.begin(), b.end()); });
  std::vector<BetaPoint> out;
  const double N = static_cast<double>(rows.size());
  for (std::size_t q = 0; q < T; ++q) {
    double s1 = 0.0, s2 = 0.0;
    for (const auto& r : rows) {
      s1 += r[q];
      s2 += r[q] * r[q];
    }
    BetaPoint p;
    p.t = ts[q];
    p.beta = s1 / N;
    p.se = std::sqrt(std::max(s2 / N - p.beta * p.beta, 0.0) / (N - 1.0));
    out.push_back(p);
  }
  return out;
}

double stable_hitting_mixing_bound(double alpha, double delta, double C, double t, double s) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw SpecError("alpha must lie in (0, 1)");
  if (!(delta > 0.0 && delta <= 1.0)) throw SpecError("delta must lie in (0, 1]");
  if (!(t >= 1.0)) throw SpecError("t must be >= 1");
  if (!(s >= 0.0)) throw SpecError("s must be >= 0");
  if (!(C > 0.0)) throw SpecError("C must be > 0");
  return C * std::pow((t + s) / t, -1.0 / (2.0 + delta));
}

}  // namespace mapfluct
