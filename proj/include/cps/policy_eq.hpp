#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cps/augmented.hpp"

namespace cps {

// Zero-bias (delta = 0) attack policy: e_t = gains[t] * xi_t. The backward
// recursion products are kept for the invariant suites.
struct EqPolicy {
  std::vector<MatrixXd> gains;   // N+1 matrices, s x 6n
  std::vector<MatrixXd> C_list;  // constraint stacks
  std::vector<MatrixXd> D_list;
  std::vector<MatrixXd> F_list;  // projectors onto null(D_t)
  std::vector<MatrixXd> Q_bold;  // N+2 value matrices, Q_bold[N+1] = 0
  int N = 0;
};

EqPolicy synthesize_eq_policy(const AugmentedSystem& aug, const RiccatiLadder& ladder,
                              const std::vector<MatrixXd>& Q_stage, int N);

VectorXd eq_attack_step(const EqPolicy& policy, int t, const VectorXd& xi);

}  // namespace cps
