#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "cps/augmented.hpp"

namespace cps {

// Convex QCQP
//   min  z^T Hobj z + 2 gobj^T z + cobj
//   s.t. || A_i z + b_i ||^2 <= rhs_i,   i = 0..m-1,
// with the constraint rows stored stacked: constraint i owns rows
// [row_offsets[i], row_offsets[i+1]) of Acon/bcon. The (P_i, q_i, r_i)
// form is P_i = A_i^T A_i, q_i = A_i^T b_i, r_i = b_i^T b_i - rhs_i.
struct QcqpProblem {
  MatrixXd Hobj;
  VectorXd gobj;
  double cobj = 0.0;
  MatrixXd Acon;
  VectorXd bcon;
  std::vector<int> row_offsets;  // m+1 entries
  VectorXd rhs;                  // m entries
  int d = 0;

  // Optional structure hint: constraints 0..toeplitz_steps-1 are successive
  // block rows (block height toeplitz_block) of one lower block-triangular
  // Toeplitz map, and toeplitz_cross points at the Gram blocks M_a^T M_b of
  // its generating blocks. Lets the barrier Hessian be assembled from the
  // cached Gram blocks instead of a fresh syrk over every constraint row.
  // The pointed-at matrix must outlive the problem.
  int toeplitz_steps = 0;
  int toeplitz_block = 0;
  const MatrixXd* toeplitz_cross = nullptr;

  int num_constraints() const { return static_cast<int>(rhs.size()); }

  // f_i(z) = ||A_i z + b_i||^2 - rhs_i
  double constraint_value(int i, const VectorXd& z) const;
  double max_violation(const VectorXd& z) const;
  double objective(const VectorXd& z) const;
};

enum class QcqpStatus { Optimal, Infeasible, MaxIter };

struct QcqpSolution {
  VectorXd z_star;
  double objective = 0.0;
  double max_violation = 0.0;
  double kkt_residual = 0.0;
  QcqpStatus status = QcqpStatus::MaxIter;
  int newton_iters = 0;
};

struct QcqpOptions {
  double barrier_init = 1.0;
  // When > 0 and a strictly feasible warm start is supplied, the barrier
  // starts here instead of barrier_init. Receding-horizon loops hand in the
  // shifted previous optimum, which is already centered at the final stage.
  double warm_barrier_init = 0.0;
  double barrier_mult = 10.0;
  double gap_tol = 1e-8;        // stop when m / t_barrier <= gap_tol * m
  double interior_margin = 1e-8;
  int max_newton_per_stage = 60;
  int max_total_newton = 2000;
};

QcqpSolution solve_qcqp(const QcqpProblem& prob,
                        const std::optional<VectorXd>& warm_start = std::nullopt,
                        const QcqpOptions& opts = {});

// Terminal quadratic-form constraint (G xi)^T P (G xi) <= bound on the
// propagated theta one step past the horizon end.
struct TerminalConstraint {
  MatrixXd P;  // 3n x 3n, PSD
  double bound;
};

// One-off construction of the deterministic-equivalent horizon program.
// Convenience wrapper over HorizonQcqpBuilder for tests and tools.
QcqpProblem build_horizon_qcqp(const AugmentedSystem& aug,
                               const std::vector<MatrixXd>& Q_stage, int N,
                               const MatrixXd& sigma_nu_inv, const VectorXd& xi_t,
                               int t, int horizon_end, double delta,
                               const std::optional<TerminalConstraint>& terminal =
                                   std::nullopt);

// Caches everything that does not depend on xi_t or t so receding-horizon
// loops can build per-step programs cheaply. The fast objective path needs
// constant stage weights; per-step weights fall back to direct assembly.
class HorizonQcqpBuilder {
 public:
  HorizonQcqpBuilder(const AugmentedSystem& aug, const std::vector<MatrixXd>& Q_stage,
                     int N, const MatrixXd& sigma_nu_inv,
                     const RiccatiLadder* ladder = nullptr);

  QcqpProblem build(const VectorXd& xi_t, int t, int horizon_end, double delta,
                    const std::optional<int>& terminal_ladder_index = std::nullopt,
                    double terminal_bound = 0.0) const;

  const AugmentedSystem& aug() const { return *aug_; }
  const RiccatiLadder* ladder() const { return ladder_; }

 private:
  const AugmentedSystem* aug_;
  const RiccatiLadder* ladder_ = nullptr;
  std::vector<MatrixXd> Q_stage_;
  int N_;
  bool constant_Q_;
  MatrixXd W_;  // Sigma_nu^{-1/2}
  std::vector<MatrixXd> markov_cost_;    // H A^u B, n x s
  std::vector<MatrixXd> weighted_bias_;  // W * (Chat Ahat^{u-1} Bhat), u >= 1; [0] = W Dhat
  std::vector<MatrixXd> markov_theta_;   // Ahat^u Bhat, 3n x s
  std::vector<MatrixXd> ladder_sqrt_;    // psd_sqrt of each ladder entry
  // S_gap cache for constant Q: sgap_[gap] column-block L holds
  // sum_{u=0}^{L-1} markov_cost_[u+gap]^T Q markov_cost_[u], s x s.
  std::vector<std::vector<MatrixXd>> sgap_;
  MatrixXd toeplitz_full_;  // weighted bias Toeplitz for the full horizon
  MatrixXd cross_;          // Gram blocks of the Toeplitz generators
};

}  // namespace cps
