#include "cps/control.hpp"

#include "cps/errors.hpp"
#include "cps/linalg.hpp"

namespace cps {

namespace {
constexpr double kRelTol = 1e-12;
constexpr int kMaxIter = 100000;
}

ControllerGains lqg_feedback_gain(const SystemModel& md, const ControllerSpec& spec) {
  const MatrixXd& A = md.A;
  const MatrixXd& B = md.B;
  MatrixXd S = spec.Q_prime;
  bool converged = false;
  for (int it = 0; it < kMaxIter; ++it) {
    MatrixXd R_eff = spec.R_prime + B.transpose() * S * B;
    MatrixXd BSA = B.transpose() * S * A;
    MatrixXd Sn = A.transpose() * S * A + spec.Q_prime -
                  BSA.transpose() * R_eff.ldlt().solve(BSA);
    Sn = symmetrize(Sn);
    double change = (Sn - S).norm();
    S = Sn;
    if (change <= kRelTol * (1.0 + S.norm())) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NoConvergence("lqg_feedback_gain: Riccati iteration did not converge");

  ControllerGains g;
  g.S = S;
  MatrixXd R_eff = spec.R_prime + B.transpose() * S * B;
  g.L = -R_eff.ldlt().solve(B.transpose() * S * A);
  g.closed_loop_radius = spectral_radius(A + B * g.L);
  if (g.closed_loop_radius >= 1.0)
    throw Unstabilizable("lqg_feedback_gain: closed loop is not stable");
  return g;
}

}  // namespace cps
