#pragma once

#include "mapfluct/map_spec.hpp"

namespace mapfluct {

// Two-phase MAP of (log|X|, sgn X) for a strictly alpha-stable X with
// two-sided jumps, alpha in (0, 1). Phase 0 is the sign +1, phase 1 the
// sign -1. The log-radius has zero natural drift and no Gaussian part;
// switches +1 -> -1 happen at rate c-/alpha and -1 -> +1 at rate c+/alpha,
// with the generalized logistic jump law at every switch.
MapSpec lamperti_stable_spec(double alpha, double rho);

}  // namespace mapfluct
