#pragma once

#include <Eigen/Dense>

#include "cps/scenario.hpp"

namespace cps {

struct ControllerGains {
  MatrixXd L;  // m x n feedback gain, u = L xhat
  MatrixXd S;  // control Riccati solution
  double closed_loop_radius;  // spectral radius of A + B L
};

// Infinite-horizon LQG feedback gain: L = -(R' + B^T S B)^-1 B^T S A with S
// the fixed point of the control Riccati recursion.
ControllerGains lqg_feedback_gain(const SystemModel& model,
                                  const ControllerSpec& spec);

}  // namespace cps
