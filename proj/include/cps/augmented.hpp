#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cps/control.hpp"
#include "cps/estimation.hpp"
#include "cps/scenario.hpp"

namespace cps {

// State-space system mapping the attack sequence to the innovation bias:
//   theta_{t+1} = A_hat theta_t + B_hat e_t,   theta_0 = 0,
//   eps_t       = C_hat theta_t + D_hat e_t.
struct BiasSystem {
  MatrixXd A_hat;  // 3n x 3n
  MatrixXd B_hat;  // 3n x s
  MatrixXd C_hat;  // p x 3n
  MatrixXd D_hat;  // p x s (equals Psi)
  int n = 0, s = 0, p = 0;
};

// Augmented state xi = (xtilde, theta, xhat0, x_star), dimension 6n:
//   xi_{t+1} = Acal xi_t + Bcal e_t + Kcal nu_tilde_{t+1},
//   eps_t    = C_tilde xi_t + D_tilde e_t,
//   xtilde_t - x_star = H xi_t,   theta_t = G xi_t.
struct AugmentedSystem {
  MatrixXd Acal;     // 6n x 6n
  MatrixXd Bcal;     // 6n x s
  MatrixXd Kcal;     // 6n x p
  MatrixXd C_tilde;  // p x 6n
  MatrixXd D_tilde;  // p x s
  MatrixXd H;        // n x 6n
  MatrixXd G;        // 3n x 6n
  BiasSystem bias;
  VectorXd x_star;
  int n = 0, s = 0, p = 0;

  int dim() const { return 6 * n; }

  // Assemble xi from its four blocks.
  VectorXd make_xi(const VectorXd& xtilde, const VectorXd& theta,
                   const VectorXd& xhat0) const;
};

// Output-energy ladder: theta^T P_hats[k] theta is the minimum of
// sum_{t=0}^{k-1} ||eps_t||^2_{Sigma_nu^-1} over attacks, P_hats[0] = 0.
struct RiccatiLadder {
  std::vector<MatrixXd> P_hats;  // N+2 matrices, indices 0..N+1
  // gains[k] (s x 3n, k >= 1) gives the first move e = -gains[k] theta of the
  // k-step minimum-output-energy attack; used to extend receding-horizon
  // plans with a feasible continuation.
  std::vector<MatrixXd> gains;
};

// Stacked horizon maps for the bias system over steps t_start..t_end:
//   eps_stack = obs * theta_{t_start} + toeplitz * e_stack.
struct HorizonMaps {
  MatrixXd obs;       // (T*p) x 3n, rows C_hat A_hat^j
  MatrixXd toeplitz;  // (T*p) x (T*s), D_hat diagonal, C_hat A_hat^{j-1} B_hat below
  int steps = 0;
};

BiasSystem build_bias_system(const SystemModel& model, const AttackChannel& channel,
                             const FilterGains& g, const ControllerGains& c);

AugmentedSystem build_augmented(const SystemModel& model, const AttackChannel& channel,
                                const FilterGains& g, const ControllerGains& c,
                                const VectorXd& x_star);

RiccatiLadder riccati_ladder(const BiasSystem& bias, const MatrixXd& sigma_nu_inv,
                             int N);

// theta^T P_hats[k] theta, floored at zero.
double min_bias_energy(const VectorXd& theta, const RiccatiLadder& ladder, int k);

// Lemma-4 membership test: xi is zero-delta feasible at time t iff
// P_hats[N-t+1] G xi = 0 (within tol).
bool zero_delta_feasible(const VectorXd& xi, int t, const RiccatiLadder& ladder,
                         const AugmentedSystem& aug, double tol = 1e-8);

HorizonMaps stack_horizon_maps(const AugmentedSystem& aug, int t_start, int t_end);

}  // namespace cps
