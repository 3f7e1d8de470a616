#pragma once

#include "mapfluct/empirical.hpp"

#include <string>
#include <vector>

namespace mapfluct {

// 200 equal bins on [0, R] with R the smallest multiple of 0.5 leaving at
// most 1e-4 of the stationary law in the overflow slots.
std::vector<double> default_law_edges(const LadderSpec& ladder, int bins = 200);

struct TvPoint {
  double t = 0.0;
  double tv = 0.0;
  double se = 0.0;      // bootstrap standard deviation
  double floor = 0.0;   // expected TV of an exact sample of the same size
};

struct TvOptions {
  std::size_t n_paths = 100000;
  std::vector<double> edges;  // default_law_edges when empty
  int bootstrap = 200;
  std::uint64_t seed = 1;
  int workers = 0;
};

// Empirical law of (O_t, J_t) from (x, i) against rho at every t of the grid.
std::vector<TvPoint> tv_decay_curve(const LadderSpec& ladder, double x, int i, const std::vector<double>& ts,
                                    const TvOptions& opt);

// Expected TV between rho and an empirical measure of n exact draws from it
// (normal approximation per slot).
double tv_noise_floor(const OvershootLawEval& rho, double n);

// Level-lattice version of the overshoot process: the level moves in steps
// of h, overshoots live on {0, h, 2h, ...} clipped at the range, and the state
// at the maximum resolves ladder jumps and switches with their exact step
// probabilities. The gap to the chain's own stationary law is carried as a
// signed vector, so the curve has no sampling floor and can follow the decay
// far below what Monte Carlo resolves.
struct LatticeOptions {
  double h = 0.01;
  double range = 0.0;       // 0: smallest multiple of 5 leaving <= tail of chi above it
  double tail = 1e-12;
  double max_range = 400.0;
  // phases x states x steps up to which quadruple precision is used
  double quad_work = 5e7;
};

struct LatticeCurve {
  std::vector<TvPoint> points;  // se is a bound on the numerical error
  double h = 0.0, range = 0.0;
  std::size_t states = 0;
  double stationary_residual = 0.0;  // || pi P - pi ||_1 of the computed law
};

LatticeCurve tv_decay_lattice(const LadderSpec& ladder, double x, int i, const std::vector<double>& ts,
                              const LatticeOptions& opt = {});

enum class RateModel { Exponential, Polynomial };
std::string to_string(RateModel m);

struct RateFit {
  RateModel model = RateModel::Exponential;
  double rate = 0.0;       // exponential: -slope of log TV in t; polynomial: slope in log t
  double intercept = 0.0;
  double r2 = 0.0;
  double t_lo = 0.0, t_hi = 0.0;
  std::size_t points = 0;
};

// Least squares on log values; only points with value > 3 se are used and at
// least min_points are required.
RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& value, const std::vector<double>& se,
                 RateModel model, std::size_t min_points = 5);
RateFit fit_rate(const std::vector<TvPoint>& curve, RateModel model, std::size_t min_points = 5);

struct BetaPoint {
  double t = 0.0;
  double beta = 0.0;
  double se = 0.0;
};

struct BetaOptions {
  std::size_t outer = 50;     // starts drawn from rho
  std::size_t inner = 20000;  // paths per start
  std::vector<double> edges;
  std::uint64_t seed = 1;
  int workers = 0;
};

// beta(rho, t) = E_rho || P_t((x, i), .) - rho ||_TV by nested Monte Carlo.
std::vector<BetaPoint> beta_mixing_stationary(const LadderSpec& ladder, const std::vector<double>& ts,
                                              const BetaOptions& opt);

// C ((t + s)/t)^{-1/(2 + delta)}
double stable_hitting_mixing_bound(double alpha, double delta, double C, double t, double s);

}  // namespace mapfluct
