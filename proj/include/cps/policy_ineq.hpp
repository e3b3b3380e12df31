#pragma once

#include <Eigen/Dense>

#include "cps/qcqp.hpp"

namespace cps {

// Carry-over between receding-horizon solves: the previous stacked solution
// warm-starts the next program (its shifted tail stays feasible) and supplies
// the final attack, which is fixed by the second-to-last solve.
struct RecedingHorizonState {
  int t = 0;
  VectorXd last_solution;
};

// Full-horizon replanning attack with budget delta > 0: at each step solve
// the program over (e_t, ..., e_N) from the current xi_t and apply the first
// block. The final step reuses the tail of the t = N-1 solve.
VectorXd optimal_attack_step(RecedingHorizonState& state,
                             const HorizonQcqpBuilder& builder,
                             const VectorXd& xi_t, double delta, int N,
                             const QcqpOptions& opts = {});

// Windowed variant: for t <= N - W optimize only W steps ahead with a
// terminal feasibility constraint on the propagated bias state; afterwards
// the remaining horizon fits in the window and the full-horizon step is used.
VectorXd windowed_attack_step(RecedingHorizonState& state,
                              const HorizonQcqpBuilder& builder,
                              const VectorXd& xi_t, double delta, int W, int N,
                              const QcqpOptions& opts = {});

}  // namespace cps
