#include "mapfluct/lamperti.hpp"

#include <algorithm>
#include <cmath>

namespace mapfluct {

namespace {

// log-radius after real time u inside a piece
double log_radius(const RealPiece& p, double u, double alpha) {
  if (alpha == 0.0) return p.l0 + p.a * u;
  if (p.a == 0.0) return p.l0;
  // exp(alpha l) = exp(alpha l0) (1 + alpha a u exp(-alpha l0))
  return p.l0 + std::log1p(alpha * p.a * u * std::exp(-alpha * p.l0)) / alpha;
}

}  // namespace

double RealPath::value_at(double t) const {
  if (pieces.empty()) return 0.0;
  auto it = std::upper_bound(pieces.begin(), pieces.end(), t, [](double v, const RealPiece& p) { return v < p.t0; });
  const RealPiece& p = it == pieces.begin() ? pieces.front() : *(it - 1);
  const double u = std::clamp(t - p.t0, 0.0, p.t1 - p.t0);
  return p.sign * std::exp(log_radius(p, u, alpha));
}

RealPath real_path_from_grid(const std::vector<double>& times, const std::vector<double>& values, double alpha) {
  if (times.size() != values.size() || times.size() < 2) throw SpecError("grid path needs matching times and values");
  RealPath z;
  z.alpha = alpha;
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    if (values[k] == 0.0) throw ComputeError("absorbed: path touches 0");
    z.pieces.push_back({times[k], times[k + 1], values[k] > 0.0 ? 1 : -1, std::log(std::abs(values[k])), 0.0});
  }
  return z;
}

MapPath lamperti_kiu_forward(const RealPath& z, double alpha) {
  MapPath out;
  double v = 0.0;
  for (const auto& p : z.pieces) {
    const double span = p.t1 - p.t0;
    double dv;
    if (alpha == 0.0) {
      dv = span;
    } else {
      const double e0 = std::exp(alpha * p.l0);
      const double r = alpha * p.a * span / e0;
      if (!(1.0 + r > 0.0)) throw ComputeError("absorbed: path touches 0");
      dv = p.a == 0.0 ? span / e0 : std::log1p(r) / (alpha * p.a);
    }
    out.pieces.push_back({v, v + dv, p.l0, p.l0 + p.a * dv, phase_of_sign(p.sign), false});
    v += dv;
  }
  out.horizon = v;
  for (std::size_t k = 1; k < out.pieces.size(); ++k) {
    const auto& a = out.pieces[k - 1];
    const auto& b = out.pieces[k];
    if (a.phase != b.phase) out.switches.push_back({b.t0, a.phase, b.phase, b.x0 - a.x1});
  }
  return out;
}

RealPath lamperti_kiu_inverse(const MapPath& path, double alpha) {
  RealPath z;
  z.alpha = alpha;
  double t = 0.0;
  for (const auto& p : path.pieces) {
    const double dv = p.t1 - p.t0;
    const double a = dv > 0.0 ? (p.x1 - p.x0) / dv : 0.0;
    double dt;
    if (alpha == 0.0)
      dt = dv;
    else if (a == 0.0)
      dt = std::exp(alpha * p.x0) * dv;
    else
      dt = std::exp(alpha * p.x0) * std::expm1(alpha * a * dv) / (alpha * a);
    z.pieces.push_back({t, t + dt, sign_of_phase(p.phase), p.x0, a});
    t += dt;
  }
  return z;
}

MapPath random_map_path(Rng& rng, int pieces) {
  MapPath out;
  double t = 0.0, x = 4.0 * rng.uniform() - 2.0;
  int phase = rng.uniform() < 0.5 ? 0 : 1;
  for (int k = 0; k < pieces; ++k) {
    const double dt = 0.05 + rng.exponential() * 0.5;
    const double slope = 2.0 * rng.normal();
    out.pieces.push_back({t, t + dt, x, x + slope * dt, phase, false});
    t += dt;
    x += slope * dt;
    const double jump = rng.normal();
    const int next = rng.uniform() < 0.4 ? 1 - phase : phase;
    if (next != phase) out.switches.push_back({t, phase, next, jump});
    x += jump;
    phase = next;
  }
  out.horizon = t;
  return out;
}

double lamperti_round_trip_error(const MapPath& path, double alpha) {
  const MapPath back = lamperti_kiu_forward(lamperti_kiu_inverse(path, alpha), alpha);
  if (back.pieces.size() != path.pieces.size()) return kInf;
  double err = 0.0;
  for (std::size_t k = 0; k < path.pieces.size(); ++k) {
    const auto& a = path.pieces[k];
    const auto& b = back.pieces[k];
    if (a.phase != b.phase) return kInf;
    err = std::max({err, std::abs(a.t0 - b.t0), std::abs(a.t1 - b.t1), std::abs(a.x0 - b.x0), std::abs(a.x1 - b.x1)});
  }
  return err;
}

}  // namespace mapfluct
