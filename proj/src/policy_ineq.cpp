#include "cps/policy_ineq.hpp"

#include "cps/errors.hpp"

namespace cps {

namespace {

// Shifted previous plan, extended where needed. A shrinking horizon keeps the
// exact tail; a fixed-size window shifts one block and appends the first move
// of the minimum-output-energy continuation (gain pad_gain_index from the
// ladder), which is what keeps the shifted plan feasible for the new terminal
// constraint. Zero padding does not have that property.
std::optional<VectorXd> warm_from_previous(const RecedingHorizonState& state,
                                           const HorizonQcqpBuilder& builder,
                                           const VectorXd& xi_t, int d,
                                           int pad_gain_index) {
  const AugmentedSystem& aug = builder.aug();
  const int s = aug.s;
  const VectorXd& prev = state.last_solution;
  if (prev.size() == d + s) return prev.tail(d);
  if (prev.size() != d || d < s) return std::nullopt;
  VectorXd w(d);
  w.head(d - s) = prev.tail(d - s);
  const RiccatiLadder* lad = builder.ladder();
  if (lad && pad_gain_index >= 1 &&
      pad_gain_index < static_cast<int>(lad->gains.size())) {
    VectorXd theta = aug.G * xi_t;
    const BiasSystem& bs = aug.bias;
    for (int j = 0; j + s <= d - s; j += s)
      theta = bs.A_hat * theta + bs.B_hat * w.segment(j, s);
    w.tail(s) = -lad->gains[pad_gain_index] * theta;
  } else {
    w.tail(s).setZero();
  }
  return w;
}

VectorXd solve_step(RecedingHorizonState& state, const QcqpProblem& prob,
                    const std::optional<VectorXd>& warm, int s, double delta,
                    const QcqpOptions& opts) {
  QcqpOptions step_opts = opts;
  if (warm && step_opts.warm_barrier_init <= 0.0) {
    // The shifted previous optimum is feasible (the constraints only see the
    // deterministic bias state), so restart the barrier at its final value
    // instead of replaying the whole continuation.
    step_opts.warm_barrier_init = 1.0 / step_opts.gap_tol;
  }
  QcqpSolution sol = solve_qcqp(prob, warm, step_opts);
  if (sol.status == QcqpStatus::Infeasible)
    throw InfeasibleStep("receding-horizon solve infeasible at t=" +
                         std::to_string(state.t));
  if (sol.max_violation > 1e-6 * (1.0 + delta))
    throw NoConvergence("receding-horizon solve did not reach feasibility at t=" +
                        std::to_string(state.t));
  state.last_solution = sol.z_star;
  state.t += 1;
  return sol.z_star.head(s);
}

}  // namespace

VectorXd optimal_attack_step(RecedingHorizonState& state,
                             const HorizonQcqpBuilder& builder,
                             const VectorXd& xi_t, double delta, int N,
                             const QcqpOptions& opts) {
  const int s = builder.aug().s;
  const int t = state.t;
  if (t < 0 || t > N)
    throw IndexOutOfRange("optimal_attack_step: time index out of range");
  if (t == N) {
    // Fixed by the t = N-1 solve; it does not affect the cost.
    if (state.last_solution.size() < 2 * s)
      throw DomainError("optimal_attack_step: no stored plan for the final step");
    VectorXd e = state.last_solution.tail(s);
    state.last_solution = e;
    state.t += 1;
    return e;
  }
  QcqpProblem prob = builder.build(xi_t, t, N, delta);
  // A same-size previous plan (handoff from a windowed phase) pads the final
  // step with the one-step minimum-energy move.
  std::optional<VectorXd> warm =
      warm_from_previous(state, builder, xi_t, prob.d, 1);
  return solve_step(state, prob, warm, s, delta, opts);
}

VectorXd windowed_attack_step(RecedingHorizonState& state,
                              const HorizonQcqpBuilder& builder,
                              const VectorXd& xi_t, double delta, int W, int N,
                              const QcqpOptions& opts) {
  if (W < 2 || W > N + 1)
    throw DomainError("windowed_attack_step: window must satisfy 2 <= W <= N+1");
  const int t = state.t;
  if (t > N - W)
    return optimal_attack_step(state, builder, xi_t, delta, N, opts);
  const int s = builder.aug().s;
  // Terminal feasibility: remaining budget expressible from theta_{t+W}.
  const int ladder_index = N - t - W + 1;
  QcqpProblem prob =
      builder.build(xi_t, t, t + W - 1, delta, ladder_index, delta);
  std::optional<VectorXd> warm =
      warm_from_previous(state, builder, xi_t, prob.d, ladder_index + 1);
  return solve_step(state, prob, warm, s, delta, opts);
}

}  // namespace cps
