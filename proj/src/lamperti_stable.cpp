#include "mapfluct/lamperti_stable.hpp"

namespace mapfluct {

MapSpec lamperti_stable_spec(double alpha, double rho) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw SpecError("lamperti-stable spec needs alpha in (0, 1)");
  if (!(rho > 0.0 && rho < 1.0)) throw SpecError("positivity parameter must lie in (0, 1)");
  const double cp = stable_c_plus(alpha, rho), cm = stable_c_minus(alpha, rho);
  if (!(cp > 0.0 && cm > 0.0)) throw SpecError("lamperti-stable spec needs two-sided jumps");
  MapSpec spec;
  for (int sign : {1, -1}) {
    LevyComponent c;
    const LampertiJumps lj{alpha, rho, sign, false};
    c.jumps = lj;
    // drift in the truncated form equal to the small-jump mean: zero natural drift
    c.drift = LevyDensity(lj).compensator(0.0);
    spec.components.push_back(c);
  }
  spec.Q = Eigen::MatrixXd(2, 2);
  spec.Q << -cm / alpha, cm / alpha, cp / alpha, -cp / alpha;
  const JumpLaw F = JumpLaw::generalized_logistic(alpha);
  spec.F = {{std::nullopt, F}, {F, std::nullopt}};
  return spec;
}

}  // namespace mapfluct
