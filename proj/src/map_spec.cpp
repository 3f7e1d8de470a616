#include "mapfluct/map_spec.hpp"

#include <cmath>
#include <sstream>

namespace mapfluct {

JumpLaw MapSpec::transition_law(int i, int j) const {
  if (F.size() > static_cast<std::size_t>(i) && F[i].size() > static_cast<std::size_t>(j) && F[i][j]) return *F[i][j];
  return JumpLaw::point_mass(0.0);
}

JumpLaw LadderSpec::transition_law(int i, int j) const {
  if (F.size() > static_cast<std::size_t>(i) && F[i].size() > static_cast<std::size_t>(j) && F[i][j]) return *F[i][j];
  return JumpLaw::point_mass(0.0);
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& v : violations) os << v.path << ": " << v.message << "\n";
  return os.str();
}

void validate_rate_matrix(const Eigen::MatrixXd& Q, ValidationReport& rep, const std::string& name) {
  if (Q.rows() != Q.cols()) {
    rep.add(name, "rate matrix must be square");
    return;
  }
  for (int i = 0; i < Q.rows(); ++i) {
    double sum = 0.0;
    for (int j = 0; j < Q.cols(); ++j) {
      if (!std::isfinite(Q(i, j))) rep.add(name + "[" + std::to_string(i) + "][" + std::to_string(j) + "]", "not finite");
      if (i != j && Q(i, j) < 0.0)
        rep.add(name + "[" + std::to_string(i) + "][" + std::to_string(j) + "]", "negative off-diagonal rate");
      sum += Q(i, j);
    }
    if (std::abs(sum) > kRowSumTol) rep.add(name + "[" + std::to_string(i) + "]", name + " row " + std::to_string(i) + " not conservative");
  }
}

namespace {

void check_law_grid(const LawGrid& F, const Eigen::MatrixXd& Q, int n, ValidationReport& rep, bool nonnegative) {
  if (F.empty()) return;
  if (static_cast<int>(F.size()) != n) {
    rep.add("F", "transitional law grid must be n x n");
    return;
  }
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(F[i].size()) != n) {
      rep.add("F[" + std::to_string(i) + "]", "transitional law grid must be n x n");
      continue;
    }
    for (int j = 0; j < n; ++j) {
      if (!F[i][j]) continue;
      const std::string path = "F[" + std::to_string(i) + "][" + std::to_string(j) + "]";
      if (i == j) rep.add(path, "diagonal transitional jump");
      else if (Q.rows() == n && Q(i, j) == 0.0) rep.add(path, "transitional jump law given for a zero rate");
      if (nonnegative && F[i][j]->support_lo() < 0.0) rep.add(path, "ladder transitional law must live on [0, inf)");
    }
  }
}

}  // namespace

ValidationReport validate(const MapSpec& spec) {
  ValidationReport rep;
  const int n = spec.n();
  if (n < 1) rep.add("components", "need at least one phase");
  if (spec.Q.rows() != n || spec.Q.cols() != n) rep.add("Q", "rate matrix must be n x n");
  else validate_rate_matrix(spec.Q, rep, "Q");
  for (int i = 0; i < n; ++i) {
    const auto& c = spec.components[i];
    const std::string path = "components[" + std::to_string(i) + "]";
    if (!std::isfinite(c.drift)) rep.add(path + ".drift", "not finite");
    if (!(c.gaussian >= 0.0)) rep.add(path + ".gaussian", "must be >= 0");
    if (c.killing != 0.0) rep.add(path + ".killing", "MAP components are unkilled");
    if (auto cp = c.cpp()) {
      if (!(cp->rate > 0.0) || !std::isfinite(cp->rate)) rep.add(path + ".jumps.rate", "compound Poisson rate must be positive and finite");
    } else if (auto s = std::get_if<StableJumps>(&c.jumps)) {
      if (!(s->alpha > 0.0 && s->alpha < 2.0) || s->alpha == 1.0) rep.add(path + ".jumps.alpha", "stable index must lie in (0,2) minus {1}");
      if (s->c_plus < 0.0 || s->c_minus < 0.0) rep.add(path + ".jumps", "stable coefficients must be nonnegative");
    } else if (auto l = std::get_if<LampertiJumps>(&c.jumps)) {
      if (!(l->alpha > 0.0 && l->alpha < 1.0)) rep.add(path + ".jumps.alpha", "lamperti-stable index must lie in (0,1)");
      if (!(l->rho > 0.0 && l->rho < 1.0)) rep.add(path + ".jumps.rho", "positivity parameter must lie in (0,1)");
      if (l->phase_sign != 1 && l->phase_sign != -1) rep.add(path + ".jumps.phase_sign", "must be +1 or -1");
    }
  }
  check_law_grid(spec.F, spec.Q, n, rep, false);
  return rep;
}

ValidationReport validate(const LadderSpec& spec) {
  ValidationReport rep;
  const int n = spec.n();
  if (n < 1) rep.add("drift", "need at least one phase");
  if (static_cast<int>(spec.jumps.size()) != n) rep.add("jumps", "need one jump entry per phase");
  if (static_cast<int>(spec.killing.size()) != n) rep.add("killing", "need one killing rate per phase");
  if (spec.Q.rows() != n || spec.Q.cols() != n) rep.add("Q", "rate matrix must be n x n");
  else validate_rate_matrix(spec.Q, rep, "Q");
  for (int i = 0; i < n; ++i) {
    const std::string path = "phases[" + std::to_string(i) + "]";
    if (!(spec.drift[i] >= 0.0)) rep.add(path + ".drift", "ladder drift must be >= 0");
    if (static_cast<int>(spec.killing.size()) == n && !(spec.killing[i] >= 0.0)) rep.add(path + ".killing", "must be >= 0");
    bool moves = spec.drift[i] > 0.0;
    if (static_cast<int>(spec.jumps.size()) == n && spec.jumps[i]) {
      const auto& cp = *spec.jumps[i];
      if (!(cp.rate >= 0.0) || !std::isfinite(cp.rate)) rep.add(path + ".jumps.rate", "rate must be finite and >= 0");
      if (cp.law.support_lo() < 0.0) rep.add(path + ".jumps.law", "ladder jumps must live on (0, inf)");
      if (cp.rate > 0.0) moves = true;
    }
    if (!moves) rep.add(path, "ordinator not strictly increasing: need drift > 0 or positive jump rate");
  }
  check_law_grid(spec.F, spec.Q, n, rep, true);
  return rep;
}

bool strongly_connected(const std::vector<std::vector<bool>>& adj) {
  const int n = static_cast<int>(adj.size());
  if (n <= 1) return true;
  auto reach_all = [&](bool reverse) {
    std::vector<bool> seen(n, false);
    std::vector<int> stack = {0};
    seen[0] = true;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n; ++v) {
        const bool e = reverse ? adj[v][u] : adj[u][v];
        if (e && !seen[v]) {
          seen[v] = true;
          stack.push_back(v);
        }
      }
    }
    for (bool s : seen)
      if (!s) return false;
    return true;
  };
  return reach_all(false) && reach_all(true);
}

bool q_matrix_irreducible(const Eigen::MatrixXd& Q) {
  const int n = static_cast<int>(Q.rows());
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) adj[i][j] = (i != j && Q(i, j) > 0.0);
  return strongly_connected(adj);
}

Eigen::VectorXd stationary_of_Q(const Eigen::MatrixXd& Q) {
  const int n = static_cast<int>(Q.rows());
  if (!q_matrix_irreducible(Q)) throw ComputeError("no unique stationary distribution");
  // pi Q = 0 with the last balance equation replaced by normalization
  Eigen::MatrixXd A = Q.transpose();
  A.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::VectorXd pi = A.fullPivLu().solve(rhs);
  // one step of iterative refinement keeps ||pi Q|| at rounding level
  Eigen::VectorXd r = rhs - A * pi;
  pi += A.fullPivLu().solve(r);
  return pi;
}

MapSpec dualize(const MapSpec& spec) {
  const int n = spec.n();
  const Eigen::VectorXd pi = stationary_of_Q(spec.Q);
  MapSpec out;
  out.Q = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      out.Q(i, j) = pi(j) * spec.Q(j, i) / pi(i);
      row += out.Q(i, j);
    }
    out.Q(i, i) = -row;
  }
  for (const auto& c : spec.components) out.components.push_back(c.negated());
  out.F.assign(n, std::vector<std::optional<JumpLaw>>(n));
  if (!spec.F.empty())
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (spec.F[j][i]) out.F[i][j] = spec.F[j][i]->negate();
  return out;
}

namespace {
bool component_equal(const LevyComponent& a, const LevyComponent& b, double tol) {
  if (std::abs(a.drift - b.drift) > tol || std::abs(a.gaussian - b.gaussian) > tol || std::abs(a.killing - b.killing) > tol)
    return false;
  if (a.jumps.index() != b.jumps.index()) return false;
  if (auto x = a.cpp()) {
    auto y = b.cpp();
    return std::abs(x->rate - y->rate) <= tol && x->law.approx_equal(y->law, tol);
  }
  if (auto x = std::get_if<StableJumps>(&a.jumps)) {
    auto y = std::get_if<StableJumps>(&b.jumps);
    return std::abs(x->alpha - y->alpha) <= tol && std::abs(x->c_plus - y->c_plus) <= tol &&
           std::abs(x->c_minus - y->c_minus) <= tol;
  }
  if (auto x = std::get_if<LampertiJumps>(&a.jumps)) {
    auto y = std::get_if<LampertiJumps>(&b.jumps);
    return std::abs(x->alpha - y->alpha) <= tol && std::abs(x->rho - y->rho) <= tol && x->phase_sign == y->phase_sign &&
           x->mirrored == y->mirrored;
  }
  return true;
}
}  // namespace

bool approx_equal(const MapSpec& a, const MapSpec& b, double tol) {
  if (a.n() != b.n()) return false;
  if ((a.Q - b.Q).cwiseAbs().maxCoeff() > tol) return false;
  for (int i = 0; i < a.n(); ++i)
    if (!component_equal(a.components[i], b.components[i], tol)) return false;
  for (int i = 0; i < a.n(); ++i)
    for (int j = 0; j < a.n(); ++j) {
      const bool ha = !a.F.empty() && a.F[i][j].has_value();
      const bool hb = !b.F.empty() && b.F[i][j].has_value();
      if (ha != hb) return false;
      if (ha && !a.F[i][j]->approx_equal(*b.F[i][j], tol)) return false;
    }
  return true;
}

IrreducibilityWitness ladder_irreducibility_sufficient(const MapSpec& spec) {
  const int n = spec.n();
  IrreducibilityWitness w;
  w.phase_reason.assign(n, "none");
  auto has_F = [&](int k, int j) { return spec.Q(k, j) > 0.0; };
  auto trans_pos = [&](int k, int j) { return has_F(k, j) && spec.transition_law(k, j).tail(0.0) > 0.0; };
  auto trans_unbounded = [&](int k, int j) { return has_F(k, j) && std::isinf(spec.transition_law(k, j).support_hi()); };

  std::vector<bool> condA(n), in1(n), in2(n);
  for (int j = 0; j < n; ++j) {
    const auto& c = spec.components[j];
    condA[j] = c.unbounded_variation() || c.positive_jumps();
    bool condB = false;
    for (int k = 0; k < n; ++k)
      if (k != j && trans_unbounded(k, j)) condB = true;
    in1[j] = condA[j] || condB;
    if (condA[j]) w.phase_reason[j] = "A";
    else if (condB) w.phase_reason[j] = "B";
  }
  for (int j = 0; j < n; ++j) {
    if (in1[j]) continue;
    for (int k = 0; k < n; ++k)
      if (k != j && in1[k] && trans_pos(k, j)) in2[j] = true;
    if (in2[j]) w.phase_reason[j] = "Lambda2";
  }
  w.route_i = true;
  for (int j = 0; j < n; ++j)
    if (!in1[j] && !in2[j]) w.route_i = false;

  std::vector<std::vector<bool>> good(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && spec.Q(i, j) > 0.0 && (condA[j] || trans_pos(i, j))) good[i][j] = true;
  w.route_ii = strongly_connected(good);
  w.holds = w.route_i || w.route_ii;
  return w;
}

}  // namespace mapfluct
