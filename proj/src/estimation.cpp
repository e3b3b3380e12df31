#include "cps/estimation.hpp"

#include "cps/errors.hpp"
#include "cps/linalg.hpp"

namespace cps {

namespace {
constexpr double kRelTol = 1e-12;
constexpr int kMaxIter = 100000;
}

FilterGains steady_state_gains(const SystemModel& md) {
  MatrixXd P = md.Sigma_x;
  const MatrixXd& A = md.A;
  const MatrixXd& C = md.C;
  bool converged = false;
  for (int it = 0; it < kMaxIter; ++it) {
    MatrixXd S = C * P * C.transpose() + md.Sigma_v;
    MatrixXd APC = A * P * C.transpose();
    MatrixXd Pn = A * P * A.transpose() + md.Sigma_w -
                  APC * S.ldlt().solve(APC.transpose());
    Pn = symmetrize(Pn);
    double change = (Pn - P).norm();
    P = Pn;
    if (change <= kRelTol * (1.0 + P.norm())) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NoConvergence("steady_state_gains: Riccati iteration did not converge");

  FilterGains g;
  g.P = P;
  g.Sigma_nu = symmetrize(C * P * C.transpose() + md.Sigma_v);
  g.Sigma_nu_inv = g.Sigma_nu.ldlt().solve(MatrixXd::Identity(md.p, md.p));
  g.K = P * C.transpose() * g.Sigma_nu_inv;
  g.P_hat = symmetrize(P - P * C.transpose() * g.Sigma_nu_inv * C * P);
  return g;
}

StepResult system_filter_step(const FilterGains& g, const FilterState& st,
                              const VectorXd& y, const VectorXd& u,
                              const SystemModel& md) {
  VectorXd nu = y - md.C * st.xpred;
  FilterState out;
  out.xhat = st.xpred + g.K * nu;
  out.xpred = md.A * out.xhat + md.B * u;
  return {out, nu};
}

StepResult attacker_filter_step(const FilterGains& g, const FilterState& st,
                                const VectorXd& y_clean, const VectorXd& u,
                                const VectorXd& e, const AttackChannel& ch,
                                const SystemModel& md) {
  VectorXd nu = y_clean - md.C * st.xpred;
  FilterState out;
  out.xhat = st.xpred + g.K * nu;
  out.xpred = md.A * out.xhat + md.B * u + ch.Gamma * e;
  return {out, nu};
}

}  // namespace cps
