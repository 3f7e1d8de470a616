#include "mapfluct/spec_io.hpp"

namespace mapfluct {

using nlohmann::json;

namespace {

double get_num(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw SpecError(std::string("'") + key + "' must be a number");
  return j.at(key).get<double>();
}

double need_num(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) throw SpecError(std::string("missing numeric '") + key + "'");
  return j.at(key).get<double>();
}

JumpPart jumps_from_json(const json& j) {
  if (j.is_null()) return std::monostate{};
  if (!j.is_object() || !j.contains("type")) throw SpecError("jumps must be an object with a 'type'");
  const std::string t = j.at("type").get<std::string>();
  if (t == "none") return std::monostate{};
  if (t == "compound_poisson") {
    if (!j.contains("law")) throw SpecError("compound_poisson jumps need a 'law'");
    return CompoundPoisson{need_num(j, "rate"), JumpLaw::from_json(j.at("law"))};
  }
  if (t == "stable") return StableJumps{need_num(j, "alpha"), need_num(j, "c_plus"), need_num(j, "c_minus")};
  if (t == "lamperti_stable")
    return LampertiJumps{need_num(j, "alpha"), need_num(j, "rho"), static_cast<int>(need_num(j, "phase_sign")),
                         j.value("mirrored", false)};
  throw SpecError("unknown jumps type '" + t + "'");
}

json jumps_to_json(const JumpPart& p) {
  if (auto c = std::get_if<CompoundPoisson>(&p)) return {{"type", "compound_poisson"}, {"rate", c->rate}, {"law", c->law.to_json()}};
  if (auto s = std::get_if<StableJumps>(&p))
    return {{"type", "stable"}, {"alpha", s->alpha}, {"c_plus", s->c_plus}, {"c_minus", s->c_minus}};
  if (auto l = std::get_if<LampertiJumps>(&p))
    return {{"type", "lamperti_stable"}, {"alpha", l->alpha}, {"rho", l->rho}, {"phase_sign", l->phase_sign}, {"mirrored", l->mirrored}};
  return {{"type", "none"}};
}

LawGrid transitions_from_json(const json& j, int n) {
  LawGrid F(n, std::vector<std::optional<JumpLaw>>(n));
  if (j.is_null()) return F;
  if (!j.is_array()) throw SpecError("'transitions' must be an array");
  for (const auto& t : j) {
    const int from = static_cast<int>(need_num(t, "from"));
    const int to = static_cast<int>(need_num(t, "to"));
    if (from < 0 || from >= n || to < 0 || to >= n) throw SpecError("transition index out of range");
    if (!t.contains("law")) throw SpecError("transition needs a 'law'");
    // diagonal entries are kept so that validation can report them
    F[from][to] = JumpLaw::from_json(t.at("law"));
  }
  return F;
}

json transitions_to_json(const LawGrid& F) {
  json arr = json::array();
  for (std::size_t i = 0; i < F.size(); ++i)
    for (std::size_t j = 0; j < F[i].size(); ++j)
      if (F[i][j]) arr.push_back({{"from", i}, {"to", j}, {"law", F[i][j]->to_json()}});
  return arr;
}

}  // namespace

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw SpecError("matrix must be a non-empty array of rows");
  const int n = static_cast<int>(j.size());
  const int m = j.at(0).is_array() ? static_cast<int>(j.at(0).size()) : 0;
  Eigen::MatrixXd out(n, m);
  for (int r = 0; r < n; ++r) {
    if (!j.at(r).is_array() || static_cast<int>(j.at(r).size()) != m) throw SpecError("matrix rows must have equal length");
    for (int c = 0; c < m; ++c) {
      if (!j.at(r).at(c).is_number()) throw SpecError("matrix entries must be numbers");
      out(r, c) = j.at(r).at(c).get<double>();
    }
  }
  return out;
}

json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

LevyComponent component_from_json(const json& j) {
  if (!j.is_object()) throw SpecError("phase entry must be an object");
  LevyComponent c;
  c.drift = get_num(j, "drift", 0.0);
  c.gaussian = get_num(j, "gaussian", 0.0);
  c.killing = get_num(j, "killing", 0.0);
  if (j.contains("jumps")) c.jumps = jumps_from_json(j.at("jumps"));
  return c;
}

json to_json(const LevyComponent& c) {
  return {{"drift", c.drift}, {"gaussian", c.gaussian}, {"killing", c.killing}, {"jumps", jumps_to_json(c.jumps)}};
}

MapSpec map_spec_from_json(const json& j) {
  if (!j.is_object() || !j.contains("phases") || !j.contains("Q")) throw SpecError("map spec needs 'phases' and 'Q'");
  MapSpec s;
  for (const auto& p : j.at("phases")) s.components.push_back(component_from_json(p));
  s.Q = matrix_from_json(j.at("Q"));
  s.F = transitions_from_json(j.contains("transitions") ? j.at("transitions") : json(), s.n());
  return s;
}

json to_json(const MapSpec& s) {
  json phases = json::array();
  for (const auto& c : s.components) phases.push_back(to_json(c));
  return {{"phases", phases}, {"Q", to_json(s.Q)}, {"transitions", transitions_to_json(s.F)}};
}

LadderSpec ladder_spec_from_json(const json& j) {
  if (!j.is_object() || !j.contains("phases") || !j.contains("Q")) throw SpecError("ladder spec needs 'phases' and 'Q'");
  LadderSpec s;
  for (const auto& p : j.at("phases")) {
    s.drift.push_back(get_num(p, "drift", 0.0));
    s.killing.push_back(get_num(p, "killing", 0.0));
    std::optional<CompoundPoisson> cp;
    if (p.contains("jumps")) {
      auto part = jumps_from_json(p.at("jumps"));
      if (auto c = std::get_if<CompoundPoisson>(&part)) cp = *c;
      else if (!std::holds_alternative<std::monostate>(part)) throw SpecError("ladder jumps must be compound Poisson");
    }
    s.jumps.push_back(cp);
  }
  s.Q = matrix_from_json(j.at("Q"));
  s.F = transitions_from_json(j.contains("transitions") ? j.at("transitions") : json(), s.n());
  return s;
}

json to_json(const LadderSpec& s) {
  json phases = json::array();
  for (int i = 0; i < s.n(); ++i) {
    json p = {{"drift", s.drift[i]}, {"killing", s.killing[i]}};
    p["jumps"] = s.jumps[i] ? jumps_to_json(*s.jumps[i]) : json{{"type", "none"}};
    phases.push_back(p);
  }
  return {{"phases", phases}, {"Q", to_json(s.Q)}, {"transitions", transitions_to_json(s.F)}};
}

}  // namespace mapfluct
