#pragma once

#include <Eigen/Dense>

#include "cps/scenario.hpp"

namespace cps {

// Steady-state Kalman filter quantities for the nominal (no-attack) model.
struct FilterGains {
  MatrixXd K;             // n x p steady-state gain
  MatrixXd P;             // prediction-error covariance (Riccati fixed point)
  MatrixXd Sigma_nu;      // innovation covariance C P C^T + Sigma_v
  MatrixXd Sigma_nu_inv;
  MatrixXd P_hat;         // filtered-error covariance P - P C^T Sigma_nu^-1 C P
};

struct FilterState {
  VectorXd xhat;   // filtered estimate at current time
  VectorXd xpred;  // one-step prediction for the next time
};

// Fixed point of the prediction Riccati recursion, iterated from Sigma_x.
FilterGains steady_state_gains(const SystemModel& model);

// One measurement update followed by a prediction with input u. Returns the
// innovation alongside the advanced state.
struct StepResult {
  FilterState state;
  VectorXd nu;
};

StepResult system_filter_step(const FilterGains& g, const FilterState& st,
                              const VectorXd& y, const VectorXd& u,
                              const SystemModel& model);

// The attacker's filter: same gain, measurements taken before the sensor
// attack is applied, prediction driven by the known attack input.
StepResult attacker_filter_step(const FilterGains& g, const FilterState& st,
                                const VectorXd& y_clean, const VectorXd& u,
                                const VectorXd& e, const AttackChannel& channel,
                                const SystemModel& model);

}  // namespace cps
