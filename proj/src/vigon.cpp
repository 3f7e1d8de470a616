#include "mapfluct/vigon.hpp"

#include "mapfluct/exponents.hpp"

#include <cmath>

namespace mapfluct {

double levy_mass(const LevyComponent& c, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  if (lo < 0.0 && hi > 0.0) throw SpecError("levy_mass needs an interval on one side of 0");
  if (const auto* cp = c.cpp()) return cp->rate * cp->law.prob_in(lo, hi);
  if (auto ld = c.levy_density()) {
    if (lo >= 0.0) return ld->tail_above(lo) - (std::isfinite(hi) ? ld->tail_above(hi) : 0.0);
    return ld->tail_below(-hi) - (std::isfinite(lo) ? ld->tail_below(-lo) : 0.0);
  }
  return 0.0;
}

namespace {

void check_coverage(const MapSpec& spec, const PotentialEstimate& U) {
  if (U.n != spec.n()) throw SpecError("potential estimate has the wrong number of phases");
  if (U.edges.size() < 2 || U.edges.front() != 0.0) throw SpecError("potential estimate must cover [0, ...)");
}

// sum over cells of U_{k,i}(cell) * mass(y_cell + (lo, hi])
template <class Mass>
double convolve(const PotentialEstimate& U, int k, int i, double lo, double hi, Mass mass) {
  double s = 0.0;
  for (std::size_t m = 0; m + 1 < U.edges.size(); ++m) {
    const double u = U.cell(k, i, m);
    if (u == 0.0) continue;
    const double y = 0.5 * (U.edges[m] + U.edges[m + 1]);
    s += u * mass(y + lo, y + hi);
  }
  return s;
}

}  // namespace

double vigon_rhs(const MapSpec& spec, const PotentialEstimate& U, int i, int j, double lo, double hi) {
  check_coverage(spec, U);
  if (U.edges.back() < hi) throw SpecError("potential grid shorter than the bin range");
  const int n = spec.n();
  const Eigen::VectorXd pi = stationary_of_Q(spec.Q);
  // the phase whose own Levy measure enters, and the phase that receives transitions
  const int own = i == j ? i : j;
  double total = (i == j ? 1.0 : pi(j) / pi(i)) *
                 convolve(U, own, i, lo, hi, [&](double a, double b) { return levy_mass(spec.components[own], a, b); });
  for (int k = 0; k < n; ++k) {
    if (k == own || spec.Q(k, own) <= 0.0) continue;
    const JumpLaw law = spec.transition_law(k, own);
    const double w = pi(k) / pi(i) * spec.Q(k, own);
    total += w * convolve(U, k, i, lo, hi, [&](double a, double b) { return law.prob_in(a, b); });
  }
  return total;
}

double vigon_rhs_dual(const MapSpec& spec, const PotentialEstimate& potential, int i, int j, double lo, double hi) {
  return vigon_rhs(dualize(spec), potential, i, j, lo, hi);
}

double vigon_rhs_levy(const LevyComponent& c, const std::vector<double>& edges, const std::vector<double>& cell_mass,
                      double lo, double hi) {
  double s = 0.0;
  for (std::size_t m = 0; m + 1 < edges.size(); ++m) {
    if (cell_mass[m] == 0.0) continue;
    const double y = 0.5 * (edges[m] + edges[m + 1]);
    s += cell_mass[m] * levy_mass(c, y + lo, y + hi);
  }
  return s;
}

namespace {

std::vector<double> step_grid(double lo, double hi, double h) {
  std::vector<double> e;
  const int k = static_cast<int>(std::lround((hi - lo) / h));
  for (int q = 0; q <= k; ++q) e.push_back(lo + h * q);
  return e;
}

struct MeanSe {
  double mean = 0.0, se = 0.0;
};

MeanSe batch_stats(const std::vector<double>& v) {
  MeanSe r;
  const double B = static_cast<double>(v.size());
  for (double x : v) r.mean += x;
  r.mean /= B;
  double ss = 0.0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  r.se = v.size() > 1 ? std::sqrt(ss / (B - 1.0) / B) : 0.0;
  return r;
}

}  // namespace

VigonReport vigon_check(const MapSpec& spec, const VigonOptions& opt) {
  const WalkerModel model = WalkerModel::from_map(spec);
  if (!model.creeping_class()) throw SpecError("vigon check needs the creeping class");
  const DichotomyResult dich = drift_dichotomy(spec);
  if (dich.verdict != Dichotomy::Transient)
    throw SpecError("vigon check needs a Transient spec (got " + to_string(dich.verdict) + ")");
  if (opt.batches < 2) throw SpecError("vigon check needs at least 2 batches");
  const int n = spec.n();
  const MapSpec dual = dualize(spec);
  const std::vector<double> bins = opt.bins.empty() ? step_grid(0.0, 4.0, 0.1) : opt.bins;
  std::vector<double> dual_edges = opt.dual_edges;
  if (dual_edges.empty()) {
    dual_edges = step_grid(0.0, 15.0, 0.1);
    dual_edges.insert(dual_edges.begin() + 1, 1e-9);  // keeps the atom at 0 at its place
  }
  const std::size_t nb = bins.size() - 1;
  const auto B = static_cast<std::size_t>(opt.batches);

  // [batch][i][j][bin]
  using Grid = std::vector<std::vector<std::vector<double>>>;
  std::vector<Grid> lhs(B), rhs(B);
  std::vector<Eigen::MatrixXd> qhat(B);
  for (std::size_t b = 0; b < B; ++b) {
    LadderEstimateOptions lo;
    lo.n_paths = opt.n_paths / B;
    lo.horizon = opt.horizon;
    lo.bins = bins;
    lo.seed = opt.seed * 7919ULL + b;
    lo.workers = opt.workers;
    const LadderEstimate est = estimate_ladder_spec(spec, lo);
    EpochOptions eo;
    eo.n_paths = opt.dual_paths / B;
    eo.depth = opt.dual_depth;
    eo.horizon = opt.dual_horizon;
    eo.seed = opt.seed * 7919ULL + 104729ULL + b;
    eo.workers = opt.workers;
    const PotentialEstimate U = estimate_epoch_potential(dual, dual_edges, eo);
    qhat[b] = est.spec.Q;
    lhs[b].assign(static_cast<std::size_t>(n), std::vector<std::vector<double>>(static_cast<std::size_t>(n)));
    rhs[b] = lhs[b];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const BinnedMeasure& m = i == j ? est.jump_measure[i] : est.transition_measure[i][j];
        for (std::size_t k = 0; k < nb; ++k) {
          lhs[b][i][j].push_back(m.mass.empty() ? 0.0 : m.mass[k]);
          rhs[b][i][j].push_back(vigon_rhs(spec, U, i, j, bins[k], bins[k + 1]));
        }
      }
  }

  VigonReport rep;
  rep.transitional_positive.assign(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n), false));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      std::vector<double> v;
      for (std::size_t b = 0; b < B; ++b) v.push_back(qhat[b](i, j));
      const MeanSe s = batch_stats(v);
      rep.transitional_positive[i][j] = s.mean > 3.0 * s.se && s.mean > 0.0;
    }

  struct Raw {
    int i, j;
    std::size_t k;
    MeanSe l, r;
  };
  std::vector<Raw> raw;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (std::size_t k = 0; k < nb; ++k) {
        std::vector<double> vl, vr;
        for (std::size_t b = 0; b < B; ++b) {
          vl.push_back(lhs[b][i][j][k]);
          vr.push_back(rhs[b][i][j][k]);
        }
        raw.push_back({i, j, k, batch_stats(vl), batch_stats(vr)});
      }
  auto in_fit = [&](std::size_t k) { return bins[k] >= opt.fit_lo - 1e-12 && bins[k + 1] <= opt.fit_hi + 1e-12; };
  auto significant = [](const Raw& r) { return r.l.mean > 3.0 * r.l.se && r.r.mean > 3.0 * r.r.se; };

  // weighted least squares on log(lhs / rhs), one scale per row phase
  rep.scale.assign(static_cast<std::size_t>(n), 1.0);
  for (int i = 0; i < n; ++i) {
    double sw = 0.0, swx = 0.0;
    for (const auto& r : raw) {
      if (r.i != i || !in_fit(r.k) || !significant(r)) continue;
      const double var = std::pow(r.l.se / r.l.mean, 2) + std::pow(r.r.se / r.r.mean, 2);
      const double w = 1.0 / std::max(var, 1e-300);
      sw += w;
      swx += w * std::log(r.l.mean / r.r.mean);
    }
    if (sw > 0.0) rep.scale[i] = std::exp(swx / sw);
  }
  for (const auto& r : raw) {
    VigonRow row;
    row.i = r.i;
    row.j = r.j;
    row.lo = bins[r.k];
    row.hi = bins[r.k + 1];
    row.lhs = r.l.mean;
    row.lhs_se = r.l.se;
    row.rhs = rep.scale[r.i] * r.r.mean;
    row.rhs_se = rep.scale[r.i] * r.r.se;
    row.ratio = row.rhs > 0.0 ? row.lhs / row.rhs : std::numeric_limits<double>::quiet_NaN();
    row.residual = row.ratio - 1.0;
    row.significant = significant(r);
    row.in_fit = in_fit(r.k);
    if (row.significant && row.in_fit) {
      rep.fit_rows += 1;
      rep.max_abs_residual = std::max(rep.max_abs_residual, std::abs(row.residual));
    }
    rep.rows.push_back(row);
  }
  rep.pass = rep.fit_rows > 0 && rep.max_abs_residual <= opt.tolerance;
  return rep;
}

bool MomentTransfer::all() const {
  for (bool h : holds)
    if (!h) return false;
  return true;
}

MomentTransfer moment_transfer_check(const MapSpec& spec, double lambda, MomentMode mode) {
  if (!(lambda > 0.0)) throw SpecError("lambda must be > 0");
  if (mode == MomentMode::Polynomial && drift_dichotomy(spec).verdict != Dichotomy::Transient)
    throw SpecError("polynomial moment transfer needs a Transient spec");
  const int n = spec.n();
  MomentTransfer out;
  out.holds.assign(static_cast<std::size_t>(n), true);
  out.offending.assign(static_cast<std::size_t>(n), {});
  for (int i = 0; i < n; ++i) {
    const auto& c = spec.components[i];
    const Moment m = mode == MomentMode::Exponential ? c.exp_tail(lambda) : c.power_tail(lambda);
    if (!m.finite) out.offending[i].push_back("jump measure of phase " + std::to_string(i));
    for (int k = 0; k < n; ++k) {
      if (k == i || spec.Q(k, i) <= 0.0 || !spec.F[k][i]) continue;
      const JumpLaw& law = *spec.F[k][i];
      bool finite;
      if (mode == MomentMode::Exponential) {
        finite = law.exp_moment(lambda).finite;
      } else {
        finite = law.tail(1.0) <= 0.0 || JumpLaw::truncated_below(law, 1.0).abs_moment(lambda).finite;
      }
      if (!finite)
        out.offending[i].push_back("transitional law " + std::to_string(k) + "->" + std::to_string(i) + " " + law.describe());
    }
    out.holds[i] = out.offending[i].empty();
  }
  return out;
}

namespace {

std::vector<Interval> positive_part(const std::vector<Interval>& in) {
  std::vector<Interval> out;
  for (const auto& iv : in) {
    const double lo = std::max(iv.lo, 0.0);
    if (iv.hi > lo) out.push_back({lo, iv.hi});
  }
  return out;
}

bool creeps_upward(const LevyComponent& c) {
  if (c.gaussian > 0.0) return true;
  if (c.finite_activity()) return c.drift > 0.0;
  auto ld = c.levy_density();
  if (ld->alpha() < 1.0) return c.drift - ld->compensator(1e-12) > 0.0;
  return false;
}

}  // namespace

ContinuityTransfer absolute_continuity_transfer(const MapSpec& spec) {
  const int n = spec.n();
  ContinuityTransfer out;
  out.transition_intervals.assign(static_cast<std::size_t>(n), std::vector<std::vector<Interval>>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i) {
    out.jump_intervals.push_back(positive_part(spec.components[i].jump_density_support()));
    bool any = !out.jump_intervals.back().empty();
    for (int k = 0; k < n; ++k) {
      if (k == i || spec.Q(k, i) <= 0.0 || !spec.F[k][i]) continue;
      out.transition_intervals[k][i] = positive_part(spec.F[k][i]->density_support());
      any = any || !out.transition_intervals[k][i].empty();
    }
    out.transfers.push_back(any);
    out.density_route = out.density_route || any;
    out.creeping_route = out.creeping_route || creeps_upward(spec.components[i]);
  }
  return out;
}

WienerHopfReport wiener_hopf_residual(const MapSpec& spec, const LadderSpec& ladder, const LadderSpec& dual_ladder,
                                      const std::vector<double>& thetas) {
  const int n = spec.n();
  if (ladder.n() != n || dual_ladder.n() != n) throw SpecError("ladder specs must match the phase count");
  const Eigen::VectorXd pi = stationary_of_Q(spec.Q);
  const Eigen::VectorXcd dpi = pi.cast<std::complex<double>>();
  WienerHopfReport rep;
  rep.thetas = thetas;
  std::vector<Eigen::MatrixXcd> A, L, R;
  for (double th : thetas) {
    A.push_back(-char_matrix_exponent(spec, th));
    const Eigen::MatrixXcd dual_up = ladder_exponent_imag(dual_ladder, -th);
    L.push_back(dpi.cwiseInverse().asDiagonal() * dual_up.transpose() * dpi.asDiagonal());
    R.push_back(ladder_exponent_imag(ladder, th));
  }
  // A ~ sum_k m_k L[:,k] R[k,:]; real and imaginary parts stacked
  const Eigen::Index rows = static_cast<Eigen::Index>(thetas.size()) * n * n * 2;
  Eigen::MatrixXd X(rows, n);
  Eigen::VectorXd y(rows);
  Eigen::Index r = 0;
  for (std::size_t t = 0; t < thetas.size(); ++t)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        for (int k = 0; k < n; ++k) {
          const std::complex<double> v = L[t](a, k) * R[t](k, b);
          X(r, k) = v.real();
          X(r + 1, k) = v.imag();
        }
        y(r) = A[t](a, b).real();
        y(r + 1) = A[t](a, b).imag();
        r += 2;
      }
  Eigen::VectorXd m = X.colPivHouseholderQr().solve(y);
  for (int k = 0; k < n; ++k) {
    if (!(m(k) > 0.0)) {
      m(k) = 1e-12;
      rep.clamped = true;
    }
    rep.diag.push_back(m(k));
  }
  for (std::size_t t = 0; t < thetas.size(); ++t) {
    const Eigen::MatrixXcd fit = L[t] * m.cast<std::complex<double>>().asDiagonal() * R[t];
    const double res = (A[t] - fit).cwiseAbs().maxCoeff();
    rep.residual.push_back(res);
    rep.max_residual = std::max(rep.max_residual, res);
    rep.max_entry = std::max(rep.max_entry, A[t].cwiseAbs().maxCoeff());
  }
  return rep;
}

}  // namespace mapfluct
