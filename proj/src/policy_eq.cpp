#include "cps/policy_eq.hpp"

#include "cps/errors.hpp"
#include "cps/linalg.hpp"

namespace cps {

namespace {
// Exact orthogonal projector onto null(D), built from the SVD null-space
// basis. Forming I - pinv(D) D instead leaves O(eps) residue that the
// downstream pseudoinverses can amplify into O(1) garbage.
MatrixXd null_projector(const MatrixXd& D, double rel_cutoff = 1e-10) {
  const int s = static_cast<int>(D.cols());
  Eigen::JacobiSVD<MatrixXd> svd(D, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double cutoff = sv.size() ? rel_cutoff * sv.maxCoeff() : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  if (rank == s) return MatrixXd::Zero(s, s);
  MatrixXd Vn = svd.matrixV().rightCols(s - rank);
  return Vn * Vn.transpose();
}
}  // namespace

EqPolicy synthesize_eq_policy(const AugmentedSystem& aug, const RiccatiLadder& ladder,
                              const std::vector<MatrixXd>& Q_stage, int N) {
  if (static_cast<int>(Q_stage.size()) != N + 1)
    throw DimensionMismatch("synthesize_eq_policy: Q_stage must have N+1 entries");
  const int d = aug.dim();
  const int s = aug.s;

  EqPolicy pol;
  pol.N = N;
  pol.gains.assign(N + 1, MatrixXd());
  pol.C_list.assign(N + 1, MatrixXd());
  pol.D_list.assign(N + 1, MatrixXd());
  pol.F_list.assign(N + 1, MatrixXd());
  pol.Q_bold.assign(N + 2, MatrixXd());
  pol.Q_bold[N + 1] = MatrixXd::Zero(d, d);

  const MatrixXd GA = aug.G * aug.Acal;  // 3n x 6n, equals [0 A_hat 0 0]
  const MatrixXd& B_hat = aug.bias.B_hat;

  for (int t = N; t >= 0; --t) {
    MatrixXd Ct, Dt;
    if (t == N) {
      Ct = aug.C_tilde;
      Dt = aug.D_tilde;
    } else {
      const MatrixXd& P = ladder.P_hats[N - t];
      Ct.resize(3 * aug.n + aug.p, d);
      Ct.topRows(3 * aug.n) = P * GA;
      Ct.bottomRows(aug.p) = aug.C_tilde;
      Dt.resize(3 * aug.n + aug.p, s);
      Dt.topRows(3 * aug.n) = P * B_hat;
      Dt.bottomRows(aug.p) = aug.D_tilde;
    }
    MatrixXd Dd = pinv(Dt);
    MatrixXd Ft = null_projector(Dt);
    MatrixXd Acl = aug.Acal - aug.Bcal * Dd * Ct;

    const MatrixXd& Qn = pol.Q_bold[t + 1];
    MatrixXd BF = aug.Bcal * Ft;
    MatrixXd core = symmetrize(BF.transpose() * Qn * BF);
    MatrixXd core_pinv = pinv(core);
    MatrixXd gain_free = Ft * core_pinv * BF.transpose() * Qn * Acl;

    pol.gains[t] = -gain_free - Dd * Ct;
    MatrixXd QA = Qn * Acl;
    pol.Q_bold[t] = symmetrize(aug.H.transpose() * Q_stage[t] * aug.H +
                               Acl.transpose() * QA -
                               QA.transpose() * BF * core_pinv * BF.transpose() * QA);
    pol.C_list[t] = std::move(Ct);
    pol.D_list[t] = std::move(Dt);
    pol.F_list[t] = std::move(Ft);
  }
  return pol;
}

VectorXd eq_attack_step(const EqPolicy& policy, int t, const VectorXd& xi) {
  if (t < 0 || t > policy.N)
    throw IndexOutOfRange("eq_attack_step: time index out of range");
  return policy.gains[t] * xi;
}

}  // namespace cps
