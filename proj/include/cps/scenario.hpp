#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cps {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct SystemModel {
  MatrixXd A;        // n x n
  MatrixXd B;        // n x m
  MatrixXd C;        // p x n
  MatrixXd Sigma_w;  // n x n
  MatrixXd Sigma_v;  // p x p
  MatrixXd Sigma_x;  // n x n
  int n = 0, m = 0, p = 0;
};

struct AttackChannel {
  MatrixXd Gamma;  // n x s
  MatrixXd Psi;    // p x s
  int s = 0;
};

struct AttackObjective {
  VectorXd x_star;               // n
  std::vector<MatrixXd> Q_stage; // N+1 stage weights
  int N = 1;
  double delta = 0.0;
};

struct ControllerSpec {
  MatrixXd Q_prime;  // n x n
  MatrixXd R_prime;  // m x m
};

enum class StrategyKind { ZeroDelta, OptimalDelta, Windowed };

struct StrategySpec {
  StrategyKind kind = StrategyKind::ZeroDelta;
  int W = 0;  // window size, Windowed only
};

struct ScenarioConfig {
  SystemModel model;
  AttackChannel channel;
  AttackObjective objective;
  ControllerSpec controller;
  std::optional<double> alpha;  // false-alarm probability
  std::optional<double> tau;    // explicit threshold; wins over alpha
  int warmup = 75;
  StrategySpec strategy;
  std::uint64_t seed = 0;
};

struct ValidationCheck {
  std::string name;
  bool pass;
  double margin;  // check-specific slack (rank deficit, min eigenvalue, ...)
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool pass = false;

  const ValidationCheck* find(const std::string& name) const;
};

// Parse a scenario document (JSON text, schema in docs/scenario_format.md).
ScenarioConfig parse_scenario(const std::string& text);

// Serialize back to the same document format (17 significant digits, so
// parse -> serialize -> parse round-trips bitwise).
std::string serialize_scenario(const ScenarioConfig& cfg);

ValidationReport validate_scenario(const ScenarioConfig& cfg);

}  // namespace cps
