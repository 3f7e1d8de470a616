#pragma once

#include "mapfluct/simulator.hpp"

#include <vector>

namespace mapfluct {

// Phase index 0 carries the sign +1 and index 1 the sign -1.
inline int sign_of_phase(int phase) { return phase == 0 ? 1 : -1; }
inline int phase_of_sign(int sign) { return sign > 0 ? 0 : 1; }

// Real path on [t0, t1] with constant sign whose log-radius l(t) satisfies
// exp(alpha l(t)) = exp(alpha l0) + alpha a (t - t0); a is the slope of the
// log-radius in the time-changed clock. For alpha = 0 the clock is the same
// and l(t) = l0 + a (t - t0).
struct RealPiece {
  double t0 = 0.0, t1 = 0.0;
  int sign = 1;
  double l0 = 0.0;
  double a = 0.0;
};

struct RealPath {
  std::vector<RealPiece> pieces;
  double alpha = 0.0;
  double value_at(double t) const;
  double end_time() const { return pieces.empty() ? 0.0 : pieces.back().t1; }
};

// Piecewise constant real path from grid values; the value on
// [times[k], times[k+1]) is values[k].
RealPath real_path_from_grid(const std::vector<double>& times, const std::vector<double>& values, double alpha);

// (log|Z|, sgn Z) in the clock t -> int_0^t |Z_s|^{-alpha} ds.
MapPath lamperti_kiu_forward(const RealPath& z, double alpha);
// Z = J e^xi in the clock t -> int_0^t e^{alpha xi_u} du.
RealPath lamperti_kiu_inverse(const MapPath& path, double alpha);

// Random two-phase piecewise linear path with jumps and sign changes.
MapPath random_map_path(Rng& rng, int pieces = 20);
// sup-norm gap between a path and forward(inverse(path)) over piece ends;
// infinite when the phases disagree
double lamperti_round_trip_error(const MapPath& path, double alpha);

}  // namespace mapfluct
