#include "mapfluct/experiment.hpp"

#include "mapfluct/ergodicity.hpp"
#include "mapfluct/exponents.hpp"
#include "mapfluct/lamperti.hpp"
#include "mapfluct/lamperti_stable.hpp"
#include "mapfluct/resolvent.hpp"
#include "mapfluct/spec_io.hpp"
#include "mapfluct/vigon.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mapfluct {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Spec failed validation; carries the report for the summary.
struct InvalidSpec : SpecError {
  json report;
  InvalidSpec(const std::string& what, json rep) : SpecError(what), report(std::move(rep)) {}
};

json report_json(const ValidationReport& rep) {
  json v = json::array();
  for (const auto& x : rep.violations) v.push_back({{"path", x.path}, {"message", x.message}});
  return {{"ok", rep.ok}, {"violations", v}};
}

enum class Source { None, Spec, Ladder, Either };

Source source_of(const std::string& kind) {
  if (kind == "resolvent-check" || kind == "stationary-check" || kind == "tv-decay" || kind == "mixing")
    return Source::Ladder;
  if (kind == "lamperti") return Source::None;
  if (kind == "wiener-hopf-check") return Source::Either;
  return Source::Spec;
}

// Defaults per kind. A null default is resolved from the spec.
const json& defaults_of(const std::string& kind) {
  static const std::map<std::string, json> table = {
      {"simulate",
       {{"paths", 10}, {"horizon", 10.0}, {"x0", 0.0}, {"phase0", 0}, {"eps", 1e-3},
        {"gaussian_refinement", false}, {"grid_dt", 0.01}}},
      {"overshoot",
       {{"paths", 10000}, {"levels", {1.0, 2.0, 5.0}}, {"max_horizon", 1e4}, {"x0", 0.0}, {"phase0", 0},
        {"eps", 1e-3}, {"grid_dt", 0.01}}},
      {"resolvent-check",
       {{"paths", 200000}, {"lambda", 1.0}, {"kappa", 1.0}, {"weights", nullptr}, {"xs", {0.0, 0.7}},
        {"phases", nullptr}, {"se_tolerance", 3.0}, {"abs_tolerance", 0.01}}},
      {"stationary-check",
       {{"paths", 100000}, {"t", 50.0}, {"x0", 0.0}, {"phase0", 0}, {"bins", 200}, {"range", nullptr},
        {"tv_tolerance", 0.03}, {"atom_tolerance", 0.01}, {"mass_tolerance", 1e-8}}},
      {"ladder-estimate",
       {{"paths", 10000}, {"horizon", 50.0}, {"bin_width", 0.1}, {"bin_max", 10.0}, {"min_events", 50},
        {"eps", 1e-3}, {"grid_dt", 0.01}}},
      {"vigon-check",
       {{"paths", 100000}, {"dual_paths", 20000}, {"horizon", 20.0}, {"dual_depth", 40.0},
        {"dual_horizon", 1e4}, {"bin_width", 0.1}, {"bin_max", 4.0}, {"dual_bin_width", 0.1},
        {"dual_max", 15.0}, {"fit_lo", 0.2}, {"fit_hi", 2.0}, {"batches", 10}, {"tolerance", 0.1}}},
      {"wiener-hopf-check",
       {{"paths", 20000}, {"dual_paths", 20000}, {"horizon", 50.0}, {"dual_depth", 40.0},
        {"dual_horizon", 1e4}, {"bin_width", 0.05}, {"bin_max", 20.0}, {"theta_max", 5.0},
        {"theta_step", 0.25}, {"tolerance", 0.1}}},
      {"tv-decay",
       {{"paths", 100000}, {"x0", 0.0}, {"phase0", 0}, {"times", {2.0, 5.0, 10.0, 20.0, 40.0}}, {"bins", 200},
        {"range", nullptr}, {"bootstrap", 200}, {"model", "exponential"}, {"min_r2", 0.9}, {"fit_on", "lattice"},
        {"lattice_step", 0.01}, {"lattice_range", 0.0}}},
      {"mixing",
       {{"paths", 20000}, {"outer", 50}, {"times", {0.0, 2.0, 5.0, 10.0, 20.0, 40.0}}, {"bins", 200},
        {"range", nullptr}, {"threshold", 0.05}, {"at_time", 40.0}}},
      {"lamperti",
       {{"alpha", 0.5}, {"rho", 0.5}, {"paths", 100}, {"pieces", 20}, {"integral_tolerance", 1e-8},
        {"round_trip_tolerance", 1e-9}, {"caps", {20.0, 40.0, 80.0, 160.0}}}},
  };
  auto it = table.find(kind);
  if (it == table.end()) throw SpecError("unknown experiment kind '" + kind + "'");
  return it->second;
}

bool same_type(const json& def, const json& v) {
  if (def.is_null()) return v.is_null() || v.is_number() || v.is_array();
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_number_integer()) return v.is_number_integer() || (v.is_number() && std::floor(v.get<double>()) == v.get<double>());
  if (def.is_number()) return v.is_number();
  if (def.is_string()) return v.is_string();
  if (def.is_array()) return v.is_array();
  return false;
}

json load_source(const json& v, const std::string& base_dir, const std::string& what) {
  if (v.is_object()) return v;
  if (v.is_string()) {
    fs::path p(v.get<std::string>());
    if (p.is_relative()) p = fs::path(base_dir) / p;
    std::ifstream in(p);
    if (!in) throw SpecError("cannot open " + what + " file " + p.string());
    return json::parse(in);
  }
  throw SpecError("'" + what + "' must be an object or a file path");
}

MapSpec checked_spec(const json& j) {
  MapSpec s = map_spec_from_json(j);
  const auto rep = validate(s);
  if (!rep.ok) throw InvalidSpec("invalid spec: " + rep.summary(), report_json(rep));
  return s;
}

LadderSpec checked_ladder(const json& j, const std::string& what = "ladder") {
  LadderSpec s = ladder_spec_from_json(j);
  const auto rep = validate(s);
  if (!rep.ok) throw InvalidSpec("invalid " + what + ": " + rep.summary(), report_json(rep));
  return s;
}

std::vector<double> uniform_edges(double width, double top) {
  if (!(width > 0.0) || !(top > 0.0)) throw SpecError("bin width and range must be > 0");
  const auto k = static_cast<std::size_t>(std::llround(top / width));
  if (k < 1 || std::abs(static_cast<double>(k) * width - top) > 1e-9 * top)
    throw SpecError("bin range must be a multiple of the bin width");
  std::vector<double> e(k + 1);
  for (std::size_t i = 0; i <= k; ++i) e[i] = top * static_cast<double>(i) / static_cast<double>(k);
  return e;
}

std::vector<double> law_edges(const json& P) {
  return uniform_edges(P.at("range").get<double>() / P.at("bins").get<double>(), P.at("range").get<double>());
}

std::vector<double> doubles(const json& a) { return a.get<std::vector<double>>(); }

void check_phase(int phase, int n, const char* key) {
  if (phase < 0 || phase >= n) throw SpecError(std::string("'") + key + "' is not a phase index");
}

class Csv {
 public:
  Csv(const fs::path& p, const std::vector<std::string>& header) : out_(p) {
    if (!out_) throw ComputeError("cannot write " + p.string());
    row_of(header);
  }
  template <class... T>
  void row(const T&... v) {
    std::vector<std::string> cells{cell(v)...};
    row_of(cells);
  }

 private:
  static std::string cell(double v) { return format_number(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }
  static std::string cell(const std::string& v) { return v; }
  void row_of(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << cells[k];
    out_ << '\n';
  }
  std::ofstream out_;
};

void write_json(const fs::path& p, const json& j) {
  std::ofstream out(p);
  if (!out) throw ComputeError("cannot write " + p.string());
  out << j.dump(2) << '\n';
}

struct Ctx {
  const json& cfg;
  const json& P;
  fs::path out;
  std::ostream& log;
  std::uint64_t seed;
  int workers;
};

// ---- runners: each returns the summary; "pass" decides exit 1

json run_simulate(const Ctx& c) {
  const MapSpec spec = map_spec_from_json(c.cfg.at("spec"));
  const auto model = WalkerModel::from_map(spec, c.P.at("eps"), c.P.at("gaussian_refinement"));
  const int phase0 = c.P.at("phase0");
  check_phase(phase0, spec.n(), "phase0");
  const auto paths = c.P.at("paths").get<std::size_t>();
  Csv pcsv(c.out / "paths.csv", {"path", "time", "value", "phase"});
  Csv scsv(c.out / "switches.csv", {"path", "time", "from", "to", "jump"});
  CompensatedSum final_sum, switches;
  std::size_t killed = 0;
  for (std::size_t p = 0; p < paths; ++p) {
    Rng rng(c.seed, p);
    const MapPath path = simulate_path(model, c.P.at("horizon"), rng, c.P.at("x0"), phase0, c.P.at("grid_dt"));
    for (const auto& pc : path.pieces) pcsv.row(p, pc.t0, pc.x0, pc.phase);
    if (!path.pieces.empty()) pcsv.row(p, path.pieces.back().t1, path.final_value(), path.final_phase());
    for (const auto& s : path.switches) scsv.row(p, s.time, s.from, s.to, s.jump);
    final_sum.add(path.final_value());
    switches.add(static_cast<double>(path.switches.size()));
    killed += path.killed ? 1 : 0;
  }
  const auto dich = drift_dichotomy(spec);
  const double N = static_cast<double>(std::max<std::size_t>(paths, 1));
  return {{"paths", paths},
          {"mean_final_value", final_sum.value() / N},
          {"mean_switches", switches.value() / N},
          {"killed", killed},
          {"dichotomy", to_string(dich.verdict)},
          {"mean_drift", dich.drift}};
}

json run_overshoot(const Ctx& c) {
  const MapSpec spec = map_spec_from_json(c.cfg.at("spec"));
  const auto model = WalkerModel::from_map(spec, c.P.at("eps"));
  const int phase0 = c.P.at("phase0");
  check_phase(phase0, spec.n(), "phase0");
  std::vector<double> levels = doubles(c.P.at("levels"));
  if (levels.empty() || !std::is_sorted(levels.begin(), levels.end())) throw SpecError("'levels' must be sorted and nonempty");
  const auto paths = c.P.at("paths").get<std::size_t>();
  Csv csv(c.out / "overshoots.csv", {"path", "level", "time", "overshoot", "phase", "crept", "censored", "killed"});
  const std::size_t L = levels.size();
  std::vector<CompensatedSum> mean(L);
  std::vector<std::size_t> ok(L, 0), crept(L, 0), censored(L, 0);
  for (std::size_t p = 0; p < paths; ++p) {
    Rng rng(c.seed, p);
    const auto s = overshoot_series(model, levels, rng, c.P.at("max_horizon"), c.P.at("x0"), phase0, c.P.at("grid_dt"));
    for (std::size_t q = 0; q < L; ++q) {
      csv.row(p, s[q].level, s[q].time, s[q].overshoot, s[q].phase, s[q].crept, s[q].censored, s[q].killed);
      if (s[q].ok()) {
        ++ok[q];
        mean[q].add(s[q].overshoot);
        crept[q] += s[q].crept ? 1 : 0;
      }
      censored[q] += s[q].censored ? 1 : 0;
    }
  }
  json per = json::array();
  for (std::size_t q = 0; q < L; ++q) {
    const double n = static_cast<double>(std::max<std::size_t>(ok[q], 1));
    per.push_back({{"level", levels[q]},
                   {"resolved", ok[q]},
                   {"censored", censored[q]},
                   {"mean_overshoot", mean[q].value() / n},
                   {"creep_fraction", static_cast<double>(crept[q]) / n}});
  }
  return {{"paths", paths}, {"levels", per}};
}

json run_resolvent(const Ctx& c) {
  const LadderSpec ladder = ladder_spec_from_json(c.cfg.at("ladder"));
  const double lambda = c.P.at("lambda");
  const TestFunction f = TestFunction::exponential(doubles(c.P.at("weights")), c.P.at("kappa"));
  const auto paths = c.P.at("paths").get<std::size_t>();
  const double se_tol = c.P.at("se_tolerance"), abs_tol = c.P.at("abs_tolerance");
  Csv csv(c.out / "resolvent.csv", {"x", "phase", "formula", "monte_carlo", "se", "abs_error", "z"});
  double max_z = 0.0, max_abs = 0.0;
  std::uint64_t idx = 0;
  for (double x : doubles(c.P.at("xs"))) {
    for (const auto& ph : c.P.at("phases")) {
      const int i = ph.get<int>();
      check_phase(i, ladder.n(), "phases");
      const double exact = resolvent(ladder, f, x, i, lambda);
      const auto mc = resolvent_monte_carlo(ladder, f, x, i, lambda, paths, c.seed + 0x9e3779b97f4a7c15ULL * idx++, c.workers);
      const double err = std::abs(mc.mean - exact);
      const double z = mc.se > 0.0 ? err / mc.se : (err == 0.0 ? 0.0 : kInf);
      csv.row(x, i, exact, mc.mean, mc.se, err, z);
      c.log << "resolvent x=" << x << " phase=" << i << " formula=" << exact << " mc=" << mc.mean << " se=" << mc.se << '\n';
      max_z = std::max(max_z, z);
      max_abs = std::max(max_abs, err);
    }
  }
  return {{"max_abs_error_over_se", max_z},
          {"max_abs_error", max_abs},
          {"pass", max_z <= se_tol && max_abs <= abs_tol}};
}

json run_stationary(const Ctx& c) {
  const LadderSpec ladder = ladder_spec_from_json(c.cfg.at("ladder"));
  const auto edges = law_edges(c.P);
  const OvershootLawEval rho = stationary_distribution(ladder, edges);
  const InvariantMeasure chi(ladder);
  const double mass_quad = chi.mass_by_quadrature();
  const int phase0 = c.P.at("phase0");
  check_phase(phase0, ladder.n(), "phase0");
  const double t = c.P.at("t"), x0 = c.P.at("x0");
  const auto paths = c.P.at("paths").get<std::size_t>();
  const std::vector<double> level{t};
  EmpiricalMeasure emp(ladder.n(), edges);
  std::size_t crept = 0;
  for (std::size_t p = 0; p < paths; ++p) {
    Rng rng(c.seed, p);
    const auto s = simulate_ladder_overshoot(ladder, level, rng, x0, phase0);
    if (!s[0].ok()) throw ComputeError("ladder path killed before the level");
    emp.add(s[0].overshoot, s[0].phase);
    crept += s[0].overshoot == 0.0 ? 1 : 0;
  }
  const OvershootLawEval e = emp.normalized();
  const double tv = tv_distance(emp, rho);
  double atoms = 0.0;
  for (int i = 0; i < ladder.n(); ++i) atoms += rho.atoms[i];
  const double creep_freq = static_cast<double>(crept) / static_cast<double>(paths);
  Csv csv(c.out / "stationary.csv", {"phase", "lo", "hi", "rho", "empirical"});
  for (int i = 0; i < ladder.n(); ++i) {
    csv.row(i, 0.0, 0.0, rho.atoms[i], e.atoms[i]);
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) csv.row(i, edges[k], edges[k + 1], rho.bins[i][k], e.bins[i][k]);
    csv.row(i, edges.back(), kInf, rho.overflow[i], e.overflow[i]);
  }
  const double floor = tv_noise_floor(rho, static_cast<double>(paths));
  const bool pass = tv <= c.P.at("tv_tolerance").get<double>() &&
                    std::abs(creep_freq - atoms) <= c.P.at("atom_tolerance").get<double>() &&
                    std::abs(chi.mass() - mass_quad) <= c.P.at("mass_tolerance").get<double>();
  return {{"tv", tv},
          {"tv_noise_floor", floor},
          {"creep_frequency", creep_freq},
          {"rho_zero_atoms", atoms},
          {"mass_closed_form", chi.mass()},
          {"mass_quadrature", mass_quad},
          {"pass", pass}};
}

json measure_json(const BinnedMeasure& m) {
  return {{"atom_zero", m.atom_zero}, {"atom_zero_se", m.atom_zero_se}, {"overflow", m.overflow}};
}

json run_ladder_estimate(const Ctx& c) {
  const MapSpec spec = map_spec_from_json(c.cfg.at("spec"));
  LadderEstimateOptions o;
  o.n_paths = c.P.at("paths");
  o.horizon = c.P.at("horizon");
  o.bins = uniform_edges(c.P.at("bin_width"), c.P.at("bin_max"));
  o.min_events = c.P.at("min_events");
  o.seed = c.seed;
  o.workers = c.workers;
  o.sim.eps = c.P.at("eps");
  o.sim.grid_dt = c.P.at("grid_dt");
  const LadderEstimate est = estimate_ladder_spec(spec, o);
  write_json(c.out / "ladder_spec.json", to_json(est.spec));
  Csv csv(c.out / "ladder_measures.csv", {"from", "to", "lo", "hi", "mass", "se"});
  const int n = spec.n();
  json atoms = json::array();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const BinnedMeasure& m = i == j ? est.jump_measure[i] : est.transition_measure[i][j];
      for (std::size_t k = 0; k < m.mass.size(); ++k) csv.row(i, j, m.edges[k], m.edges[k + 1], m.mass[k], m.se[k]);
      json a = measure_json(m);
      a["from"] = i;
      a["to"] = j;
      atoms.push_back(a);
    }
  }
  return {{"ladder_events", est.ladder_events},
          {"local_time", est.stats.local_time},
          {"low_count_warning", est.low_count_warning},
          {"Q_se", to_json(est.q_se)},
          {"measures", atoms},
          {"dichotomy", to_string(drift_dichotomy(spec).verdict)}};
}

json run_vigon(const Ctx& c) {
  const MapSpec spec = map_spec_from_json(c.cfg.at("spec"));
  VigonOptions o;
  o.n_paths = c.P.at("paths");
  o.dual_paths = c.P.at("dual_paths");
  o.horizon = c.P.at("horizon");
  o.dual_depth = c.P.at("dual_depth");
  o.dual_horizon = c.P.at("dual_horizon");
  o.bins = uniform_edges(c.P.at("bin_width"), c.P.at("bin_max"));
  o.dual_edges = uniform_edges(c.P.at("dual_bin_width"), c.P.at("dual_max"));
  o.dual_edges.insert(o.dual_edges.begin() + 1, 1e-9);
  o.fit_lo = c.P.at("fit_lo");
  o.fit_hi = c.P.at("fit_hi");
  o.batches = c.P.at("batches");
  o.tolerance = c.P.at("tolerance");
  o.seed = c.seed;
  o.workers = c.workers;
  const VigonReport rep = vigon_check(spec, o);
  Csv csv(c.out / "vigon.csv", {"i", "j", "lo", "hi", "lhs", "rhs", "residual", "se", "lhs_se", "rhs_se", "significant", "in_fit"});
  for (const auto& r : rep.rows) {
    const double se = r.rhs > 0.0 ? std::hypot(r.lhs_se / r.rhs, r.lhs * r.rhs_se / (r.rhs * r.rhs)) : kInf;
    csv.row(r.i, r.j, r.lo, r.hi, r.lhs, r.rhs, r.residual, se, r.lhs_se, r.rhs_se, r.significant, r.in_fit);
  }
  json tp = json::array();
  for (const auto& row : rep.transitional_positive) tp.push_back(row);
  return {{"scale", rep.scale},
          {"max_abs_residual", rep.max_abs_residual},
          {"fit_rows", rep.fit_rows},
          {"transitional_positive", tp},
          {"pass", rep.pass}};
}

json run_wiener_hopf(const Ctx& c) {
  const MapSpec spec = map_spec_from_json(c.cfg.at("spec"));
  LadderSpec up, down;
  if (c.cfg.contains("ladder")) {
    up = ladder_spec_from_json(c.cfg.at("ladder"));
    down = ladder_spec_from_json(c.cfg.at("dual_ladder"));
  } else {
    LadderEstimateOptions o;
    o.n_paths = c.P.at("paths");
    o.horizon = c.P.at("horizon");
    o.bins = uniform_edges(c.P.at("bin_width"), c.P.at("bin_max"));
    o.seed = c.seed;
    o.workers = c.workers;
    up = estimate_ladder_spec(spec, o).spec;
    EpochOptions e;
    e.n_paths = c.P.at("dual_paths");
    e.depth = c.P.at("dual_depth");
    e.horizon = c.P.at("dual_horizon");
    e.bins = o.bins;
    e.seed = c.seed ^ 0x5bd1e9955bd1e995ULL;
    e.workers = c.workers;
    down = estimate_epoch_ladder(dualize(spec), e).spec;
    write_json(c.out / "ladder_spec.json", to_json(up));
    write_json(c.out / "dual_ladder_spec.json", to_json(down));
  }
  const double tmax = c.P.at("theta_max"), step = c.P.at("theta_step");
  if (!(tmax > 0.0 && step > 0.0)) throw SpecError("theta grid needs positive theta_max and theta_step");
  std::vector<double> thetas;
  const auto k = static_cast<long>(std::floor(tmax / step + 1e-9));
  for (long q = -k; q <= k; ++q) thetas.push_back(static_cast<double>(q) * step);
  const WienerHopfReport rep = wiener_hopf_residual(spec, up, down, thetas);
  Csv csv(c.out / "wiener_hopf.csv", {"theta", "residual"});
  for (std::size_t q = 0; q < rep.thetas.size(); ++q) csv.row(rep.thetas[q], rep.residual[q]);
  const double rel = rep.max_entry > 0.0 ? rep.max_residual / rep.max_entry : kInf;
  return {{"diag", rep.diag},
          {"clamped", rep.clamped},
          {"max_residual", rep.max_residual},
          {"max_entry", rep.max_entry},
          {"relative_residual", rel},
          {"pass", rel <= c.P.at("tolerance").get<double>()}};
}

json fit_json(const std::vector<TvPoint>& curve, RateModel model, double min_r2) {
  try {
    const RateFit fit = fit_rate(curve, model);
    const bool sign_ok = model == RateModel::Exponential ? fit.rate > 0.0 : fit.rate < 0.0;
    return {{"model", to_string(fit.model)}, {"rate", fit.rate}, {"intercept", fit.intercept}, {"r2", fit.r2},
            {"points", fit.points},          {"t_lo", fit.t_lo}, {"t_hi", fit.t_hi},
            {"pass", sign_ok && fit.r2 >= min_r2}};
  } catch (const ComputeError& e) {
    return {{"model", to_string(model)}, {"fit_error", e.what()}, {"pass", false}};
  }
}

json run_tv_decay(const Ctx& c) {
  const LadderSpec ladder = ladder_spec_from_json(c.cfg.at("ladder"));
  const int phase0 = c.P.at("phase0");
  check_phase(phase0, ladder.n(), "phase0");
  const std::string model_name = c.P.at("model"), fit_on = c.P.at("fit_on");
  if (model_name != "exponential" && model_name != "polynomial") throw SpecError("'model' must be exponential or polynomial");
  if (fit_on != "lattice" && fit_on != "monte_carlo") throw SpecError("'fit_on' must be lattice or monte_carlo");
  const RateModel model = model_name == "exponential" ? RateModel::Exponential : RateModel::Polynomial;
  const auto ts = doubles(c.P.at("times"));
  TvOptions o;
  o.n_paths = c.P.at("paths");
  o.edges = law_edges(c.P);
  o.bootstrap = c.P.at("bootstrap");
  o.seed = c.seed;
  o.workers = c.workers;
  const auto curve = tv_decay_curve(ladder, c.P.at("x0"), phase0, ts, o);
  LatticeOptions lo;
  lo.h = c.P.at("lattice_step");
  lo.range = c.P.at("lattice_range");
  const LatticeCurve lat = tv_decay_lattice(ladder, c.P.at("x0"), phase0, ts, lo);
  Csv csv(c.out / "tv_curve.csv", {"t", "tv", "se", "floor", "lattice_tv", "lattice_err"});
  for (std::size_t q = 0; q < curve.size(); ++q)
    csv.row(curve[q].t, curve[q].tv, curve[q].se, curve[q].floor, lat.points[q].tv, lat.points[q].se);
  const double min_r2 = c.P.at("min_r2");
  json mc = fit_json(curve, model, min_r2), lf = fit_json(lat.points, model, min_r2);
  const bool pass = (fit_on == "lattice" ? lf : mc).at("pass").get<bool>();
  return {{"fit_on", fit_on},
          {"monte_carlo_fit", mc},
          {"lattice_fit", lf},
          {"lattice_range", lat.range},
          {"lattice_states", lat.states},
          {"lattice_stationary_residual", lat.stationary_residual},
          {"pass", pass}};
}

json run_mixing(const Ctx& c) {
  const LadderSpec ladder = ladder_spec_from_json(c.cfg.at("ladder"));
  BetaOptions o;
  o.outer = c.P.at("outer");
  o.inner = c.P.at("paths");
  o.edges = law_edges(c.P);
  o.seed = c.seed;
  o.workers = c.workers;
  const double at = c.P.at("at_time");
  const auto ts = doubles(c.P.at("times"));
  if (std::find(ts.begin(), ts.end(), at) == ts.end()) throw SpecError("'at_time' must be one of 'times'");
  const auto pts = beta_mixing_stationary(ladder, ts, o);
  Csv csv(c.out / "beta.csv", {"t", "beta", "se"});
  for (const auto& p : pts) csv.row(p.t, p.beta, p.se);
  bool monotone = true;
  for (std::size_t k = 1; k < pts.size(); ++k)
    if (pts[k].beta > pts[k - 1].beta + 3.0 * std::hypot(pts[k].se, pts[k - 1].se)) monotone = false;
  double beta_at = kInf;
  for (const auto& p : pts)
    if (p.t == at) beta_at = p.beta;
  return {{"nonincreasing", monotone},
          {"beta_at", beta_at},
          {"pass", monotone && beta_at < c.P.at("threshold").get<double>()}};
}

json run_lamperti(const Ctx& c) {
  const double alpha = c.P.at("alpha"), rho = c.P.at("rho");
  const MapSpec spec = lamperti_stable_spec(alpha, rho);
  const JumpLaw F = spec.transition_law(0, 1);
  const double f_int = integrate([&](double x) { return F.density(x); }, -kInf, kInf, 1e-13);
  const bool f_ok = std::abs(f_int - 1.0) <= c.P.at("integral_tolerance").get<double>();
  // lambda = alpha/2 must be finite everywhere, lambda = alpha must blow up
  const double half = 0.5 * alpha;
  bool half_finite = true;
  for (int i = 0; i < spec.n(); ++i) half_finite = half_finite && spec.components[i].exp_tail(half).finite;
  half_finite = half_finite && F.exp_moment(half).finite;
  const auto caps = doubles(c.P.at("caps"));
  if (caps.size() < 3 || !std::is_sorted(caps.begin(), caps.end())) throw SpecError("'caps' needs 3 or more sorted values");
  Csv csv(c.out / "lamperti_tail.csv", {"lambda", "cap", "integral"});
  auto probe = [&](double s) {
    const LevyDensity d = *spec.components[0].levy_density();
    std::vector<double> v;
    for (double cap : caps) {
      v.push_back(d.exp_tail_integral_to(s, cap));
      csv.row(s, cap, v.back());
    }
    const std::size_t m = v.size();
    const double last = v[m - 1] - v[m - 2], prev = v[m - 2] - v[m - 3];
    // bounded partial integrals shrink geometrically; divergent ones do not
    return std::pair<bool, double>{last > 0.5 * prev && last > 1e-6, v.back()};
  };
  const auto at_half = probe(half);
  const auto at_full = probe(alpha);
  const bool full_divergent = at_full.first && !spec.components[0].exp_tail(alpha).finite;
  const auto dich = drift_dichotomy(spec);
  const auto paths = c.P.at("paths").get<std::size_t>();
  double worst = 0.0;
  for (std::size_t p = 0; p < paths; ++p) {
    Rng rng(c.seed, p);
    worst = std::max(worst, lamperti_round_trip_error(random_map_path(rng, c.P.at("pieces")), alpha));
  }
  const bool rt_ok = worst <= c.P.at("round_trip_tolerance").get<double>();
  return {{"f_integral", f_int},
          {"f_integral_ok", f_ok},
          {"moment_finite_at_half_alpha", half_finite && !at_half.first},
          {"moment_divergent_at_alpha", full_divergent},
          {"partial_integral_at_alpha", at_full.second},
          {"dichotomy", to_string(dich.verdict)},
          {"mean_drift", dich.drift},
          {"round_trip_max_error", worst},
          {"pass", f_ok && half_finite && !at_half.first && full_divergent &&
                       dich.verdict == Dichotomy::Transient && rt_ok}};
}

json dispatch(const std::string& kind, const Ctx& c) {
  if (kind == "simulate") return run_simulate(c);
  if (kind == "overshoot") return run_overshoot(c);
  if (kind == "resolvent-check") return run_resolvent(c);
  if (kind == "stationary-check") return run_stationary(c);
  if (kind == "ladder-estimate") return run_ladder_estimate(c);
  if (kind == "vigon-check") return run_vigon(c);
  if (kind == "wiener-hopf-check") return run_wiener_hopf(c);
  if (kind == "tv-decay") return run_tv_decay(c);
  if (kind == "mixing") return run_mixing(c);
  if (kind == "lamperti") return run_lamperti(c);
  throw SpecError("unknown experiment kind '" + kind + "'");
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> k = {"simulate",          "overshoot", "resolvent-check", "stationary-check",
                                             "ladder-estimate",   "vigon-check", "wiener-hopf-check", "tv-decay",
                                             "mixing",            "lamperti"};
  return k;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw SpecError(std::string("config is not valid JSON: ") + e.what());
  }
}

json resolve_config(const std::string& kind, const json& raw, const RunOverrides& ov, const std::string& base_dir) {
  const json& defaults = defaults_of(kind);
  if (!raw.is_object()) throw SpecError("config must be a JSON object");
  static const std::set<std::string> top = {"schema_version", "kind", "seed", "workers", "spec", "ladder", "dual_ladder", "params"};
  for (const auto& [k, v] : raw.items())
    if (!top.count(k)) throw SpecError("unknown config key '" + k + "'");
  if (!raw.contains("schema_version")) throw SpecError("config lacks 'schema_version'");
  if (!raw["schema_version"].is_number_integer() || raw["schema_version"].get<int>() != kSchemaVersion)
    throw SpecError("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
  if (raw.contains("kind") && raw["kind"] != kind) throw SpecError("config kind '" + raw["kind"].dump() + "' does not match '" + kind + "'");

  json out;
  out["schema_version"] = kSchemaVersion;
  out["kind"] = kind;
  std::uint64_t seed = kDefaultSeed;
  if (raw.contains("seed")) {
    if (!raw["seed"].is_number_unsigned()) throw SpecError("'seed' must be a nonnegative integer");
    seed = raw["seed"].get<std::uint64_t>();
  }
  if (ov.seed) seed = *ov.seed;
  out["seed"] = seed;
  int workers = 1;
  if (raw.contains("workers")) {
    if (!raw["workers"].is_number_integer() || raw["workers"].get<int>() < 1) throw SpecError("'workers' must be a positive integer");
    workers = raw["workers"];
  }
  if (ov.workers) workers = *ov.workers;
  if (workers < 1) throw SpecError("worker count must be >= 1");
  out["workers"] = workers;

  // model sources
  const Source src = source_of(kind);
  int n = 0;
  std::optional<LadderSpec> ladder;
  if (src == Source::Spec || src == Source::Either) {
    if (!raw.contains("spec")) throw SpecError("experiment '" + kind + "' needs a 'spec'");
    const MapSpec s = checked_spec(load_source(raw["spec"], base_dir, "spec"));
    out["spec"] = to_json(s);
    n = s.n();
  }
  if (src == Source::Ladder) {
    if (!raw.contains("ladder")) throw SpecError("experiment '" + kind + "' needs a 'ladder'");
    ladder = checked_ladder(load_source(raw["ladder"], base_dir, "ladder"));
    out["ladder"] = to_json(*ladder);
    n = ladder->n();
  }
  if (src == Source::Either && (raw.contains("ladder") || raw.contains("dual_ladder"))) {
    if (!raw.contains("ladder") || !raw.contains("dual_ladder")) throw SpecError("give both 'ladder' and 'dual_ladder' or neither");
    out["ladder"] = to_json(checked_ladder(load_source(raw["ladder"], base_dir, "ladder")));
    out["dual_ladder"] = to_json(checked_ladder(load_source(raw["dual_ladder"], base_dir, "dual_ladder"), "dual_ladder"));
  } else if (src != Source::Either) {
    for (const char* k : {"spec", "ladder", "dual_ladder"}) {
      const bool wanted = (src == Source::Spec && std::string(k) == "spec") || (src == Source::Ladder && std::string(k) == "ladder");
      if (raw.contains(k) && !wanted) throw SpecError(std::string("'") + k + "' is not used by '" + kind + "'");
    }
  }

  // parameters
  json params = defaults;
  if (raw.contains("params")) {
    if (!raw["params"].is_object()) throw SpecError("'params' must be an object");
    for (const auto& [k, v] : raw["params"].items()) {
      if (!defaults.contains(k)) throw SpecError("unknown parameter '" + k + "' for '" + kind + "'");
      if (!same_type(defaults[k], v)) throw SpecError("parameter '" + k + "' has the wrong type");
      params[k] = defaults[k].is_number_integer() ? json(static_cast<long long>(v.get<double>())) : v;
    }
  }
  if (ov.paths) params["paths"] = *ov.paths;
  for (const auto& [k, v] : params.items())
    if (v.is_number() && !std::isfinite(v.get<double>()) ) throw SpecError("parameter '" + k + "' must be finite");
  if (params.contains("paths") && !(params["paths"].get<long long>() >= 1)) throw SpecError("'paths' must be >= 1");
  if (params.contains("weights") && params["weights"].is_null()) params["weights"] = std::vector<double>(static_cast<std::size_t>(n), 1.0);
  if (params.contains("weights") && (!params["weights"].is_array() || static_cast<int>(params["weights"].size()) != n))
    throw SpecError("'weights' needs one entry per phase");
  if (params.contains("phases") && params["phases"].is_null()) {
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    params["phases"] = all;
  }
  if (params.contains("range") && params["range"].is_null()) {
    const int bins = params["bins"];
    if (bins < 1) throw SpecError("'bins' must be >= 1");
    params["range"] = default_law_edges(*ladder, bins).back();
  } else if (params.contains("range") && !params["range"].is_number()) {
    throw SpecError("'range' must be a number");
  }
  out["params"] = params;
  return out;
}

int run_experiment(const std::string& kind, const json& raw, const RunOverrides& ov, const std::string& out_dir,
                   std::ostream& log, const std::string& base_dir) {
  const fs::path out(out_dir);
  auto fail = [&](int code, const std::string& status, const std::string& msg, const json& extra) {
    log << "error: " << msg << '\n';
    json s = {{"kind", kind}, {"status", status}, {"error", msg}, {"exit_code", code}};
    if (!extra.is_null()) {
      s["validation"] = extra;
      log << extra.dump(2) << '\n';
    }
    try {
      fs::create_directories(out);
      write_json(out / "summary.json", s);
    } catch (const std::exception&) {
    }
    return code;
  };
  json cfg;
  try {
    cfg = resolve_config(kind, raw, ov, base_dir);
  } catch (const InvalidSpec& e) {
    return fail(kExitConfig, "config_error", e.what(), e.report);
  } catch (const SpecError& e) {
    return fail(kExitConfig, "config_error", e.what(), nullptr);
  } catch (const json::exception& e) {
    return fail(kExitConfig, "config_error", e.what(), nullptr);
  }
  try {
    fs::create_directories(out);
    write_json(out / "manifest.json", cfg);
    const Ctx ctx{cfg, cfg.at("params"), out, log, cfg.at("seed").get<std::uint64_t>(), cfg.at("workers").get<int>()};
    json summary = dispatch(kind, ctx);
    summary["kind"] = kind;
    const bool assertion = summary.contains("pass");
    const int code = assertion && !summary["pass"].get<bool>() ? kExitAssertion : kExitOk;
    summary["status"] = code == kExitOk ? "ok" : "assertion_failed";
    summary["exit_code"] = code;
    write_json(out / "summary.json", summary);
    log << kind << ": " << summary["status"].get<std::string>() << '\n';
    return code;
  } catch (const SpecError& e) {
    return fail(kExitConfig, "config_error", e.what(), nullptr);
  } catch (const json::exception& e) {
    return fail(kExitConfig, "config_error", e.what(), nullptr);
  } catch (const std::exception& e) {
    return fail(kExitRuntime, "runtime_error", e.what(), nullptr);
  }
}

}  // namespace mapfluct
