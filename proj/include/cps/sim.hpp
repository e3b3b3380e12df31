#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cps/augmented.hpp"
#include "cps/chi2.hpp"
#include "cps/control.hpp"
#include "cps/estimation.hpp"
#include "cps/policy_eq.hpp"
#include "cps/qcqp.hpp"
#include "cps/scenario.hpp"

namespace cps {

struct SimStep {
  int t = 0;
  VectorXd x, xhat, xtilde, xhat0, u, e, y;
  VectorXd nu, nu0, eps;
  double g = 0.0;
  bool alarm = false;
};

struct SimTrace {
  std::vector<SimStep> steps;  // t = -warmup .. N
  int warmup = 0;
  int N = 0;
  std::uint64_t seed = 0;
  double tau = 0.0;
};

// Attack decision given the current time and reconstructed augmented state;
// called only for t in [0, N].
using AttackStrategy = std::function<VectorXd(int t, const VectorXd& xi)>;

// Everything derivable from a validated scenario once: steady-state filter
// and controller gains, detector threshold, augmented/bias systems, ladder,
// and noise Cholesky factors. Policy machinery is built lazily.
struct SimSetup {
  ScenarioConfig cfg;
  FilterGains filt;
  ControllerGains ctrl;
  DetectorConfig detector;
  AugmentedSystem aug;
  RiccatiLadder ladder;
  MatrixXd chol_x, chol_w, chol_v;  // lower Cholesky factors

  std::shared_ptr<const EqPolicy> eq_policy() const;
  std::shared_ptr<const HorizonQcqpBuilder> qcqp_builder() const;

 private:
  mutable std::shared_ptr<const EqPolicy> eq_;
  mutable std::shared_ptr<const HorizonQcqpBuilder> builder_;
};

SimSetup prepare_setup(const ScenarioConfig& cfg);

// Fresh strategy instance (receding-horizon strategies carry per-run state).
AttackStrategy make_strategy(const SimSetup& setup, const StrategySpec& spec,
                             double delta);

SimTrace simulate_closed_loop(const SimSetup& setup, const AttackStrategy& strategy,
                              std::uint64_t seed);

struct CostReport {
  double realized = 0.0;       // sum_t ||x_t - x*||^2_{Q_t} over t = 0..N
  double constant_part = 0.0;  // attack-independent sum_t trace(P_hat Q_t)
};

CostReport realized_cost(const SimTrace& trace, const std::vector<MatrixXd>& Q_stage,
                         const VectorXd& x_star, const FilterGains& filt);

struct MonteCarloSummary {
  int runs = 0;
  double mean_cost = 0.0;
  double cost_stderr = 0.0;
  VectorXd mean_eps_sq;  // per t in [0, N], Sigma_nu^-1 weighted
  VectorXd max_eps_sq;
  VectorXd alarm_freq;
  VectorXd mean_g;
  double overall_alarm_freq = 0.0;
  VectorXd mean_final_state;
  double mean_final_deviation = 0.0;
  double constant_part = 0.0;
};

MonteCarloSummary monte_carlo(const SimSetup& setup, const StrategySpec& spec,
                              double delta, int runs, std::uint64_t base_seed);

// Replays a fixed attack sequence through the paired attacked/attack-free
// simulations and compares the measured innovation bias against the bias
// recursion iterated independently. Returns the max relative discrepancy.
double bias_oracle_check(const SimSetup& setup,
                         const std::vector<VectorXd>& attack_sequence,
                         std::uint64_t seed);

std::string trace_to_csv(const SimTrace& trace, const SimSetup& setup);
std::string summary_to_csv(const MonteCarloSummary& s);

}  // namespace cps
