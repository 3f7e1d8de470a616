#pragma once

#include "mapfluct/levy_component.hpp"

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace mapfluct {

using LawGrid = std::vector<std::vector<std::optional<JumpLaw>>>;

// Markov additive process: one Levy component per phase, modulator rates Q
// and transitional jump laws F[i][j] applied at switches i -> j.
struct MapSpec {
  std::vector<LevyComponent> components;
  Eigen::MatrixXd Q;
  LawGrid F;

  int n() const { return static_cast<int>(components.size()); }
  // transitional jump law, point mass at 0 when absent
  JumpLaw transition_law(int i, int j) const;
};

// Markov additive subordinator (ladder height process).
struct LadderSpec {
  std::vector<double> drift;
  std::vector<std::optional<CompoundPoisson>> jumps;
  Eigen::MatrixXd Q;
  LawGrid F;
  std::vector<double> killing;

  int n() const { return static_cast<int>(drift.size()); }
  JumpLaw transition_law(int i, int j) const;
  double jump_rate(int i) const { return jumps[i] ? jumps[i]->rate : 0.0; }
};

struct Violation {
  std::string path;
  std::string message;
};

struct ValidationReport {
  bool ok = true;
  std::vector<Violation> violations;
  void add(std::string path, std::string msg) {
    ok = false;
    violations.push_back({std::move(path), std::move(msg)});
  }
  std::string summary() const;
};

constexpr double kRowSumTol = 1e-12;

ValidationReport validate(const MapSpec& spec);
ValidationReport validate(const LadderSpec& spec);
// checks only the rate matrix part
void validate_rate_matrix(const Eigen::MatrixXd& Q, ValidationReport& rep, const std::string& name);

bool q_matrix_irreducible(const Eigen::MatrixXd& Q);
// graph version: adjacency[i][j] true when edge i->j exists
bool strongly_connected(const std::vector<std::vector<bool>>& adjacency);

Eigen::VectorXd stationary_of_Q(const Eigen::MatrixXd& Q);

MapSpec dualize(const MapSpec& spec);
bool approx_equal(const MapSpec& a, const MapSpec& b, double tol);

struct IrreducibilityWitness {
  bool holds = false;
  bool route_i = false;   // Lambda_1 union Lambda_2 covers every phase
  bool route_ii = false;  // good edges strongly connected
  std::vector<std::string> phase_reason;  // "A", "B", "Lambda2" or "none"
};

IrreducibilityWitness ladder_irreducibility_sufficient(const MapSpec& spec);

}  // namespace mapfluct
