#include "cps/augmented.hpp"

#include "cps/errors.hpp"
#include "cps/linalg.hpp"

namespace cps {

BiasSystem build_bias_system(const SystemModel& md, const AttackChannel& ch,
                             const FilterGains& g, const ControllerGains& c) {
  const int n = md.n, s = ch.s, p = md.p;
  BiasSystem bs;
  bs.n = n;
  bs.s = s;
  bs.p = p;

  const MatrixXd KC = g.K * md.C;
  const MatrixXd BL = md.B * c.L;

  bs.A_hat = MatrixXd::Zero(3 * n, 3 * n);
  bs.A_hat.block(0, 0, n, n) = (MatrixXd::Identity(n, n) - KC) * md.A + BL;
  bs.A_hat.block(0, n, n, n) = KC;
  bs.A_hat.block(0, 2 * n, n, n) = KC;
  bs.A_hat.block(n, 0, n, n) = md.A * BL;
  bs.A_hat.block(n, n, n, n) = md.A;
  bs.A_hat.block(2 * n, 2 * n, n, n) = md.A;

  bs.B_hat = MatrixXd::Zero(3 * n, s);
  bs.B_hat.topRows(n) = g.K * ch.Psi;
  bs.B_hat.bottomRows(n) = ch.Gamma;

  bs.C_hat = MatrixXd::Zero(p, 3 * n);
  bs.C_hat.leftCols(n) = -md.C * md.A;
  bs.C_hat.middleCols(n, n) = md.C;
  bs.C_hat.rightCols(n) = md.C;

  bs.D_hat = ch.Psi;
  return bs;
}

AugmentedSystem build_augmented(const SystemModel& md, const AttackChannel& ch,
                                const FilterGains& g, const ControllerGains& c,
                                const VectorXd& x_star) {
  const int n = md.n, s = ch.s, p = md.p;
  AugmentedSystem aug;
  aug.n = n;
  aug.s = s;
  aug.p = p;
  aug.x_star = x_star;
  aug.bias = build_bias_system(md, ch, g, c);

  const MatrixXd BL = md.B * c.L;
  // Omega maps theta_t to the attack-induced shift of the system estimate,
  // up to the K Psi e_t feed-through handled separately.
  MatrixXd Omega(n, 3 * n);
  Omega.leftCols(n) = aug.bias.A_hat.block(0, 0, n, n);
  Omega.middleCols(n, n) = aug.bias.A_hat.block(0, n, n, n);
  Omega.rightCols(n) = aug.bias.A_hat.block(0, 2 * n, n, n);

  const int d = 6 * n;
  aug.Acal = MatrixXd::Zero(d, d);
  aug.Acal.block(0, 0, n, n) = md.A;
  aug.Acal.block(0, n, n, 3 * n) = BL * Omega;
  aug.Acal.block(0, 4 * n, n, n) = BL;
  aug.Acal.block(n, n, 3 * n, 3 * n) = aug.bias.A_hat;
  aug.Acal.block(4 * n, 4 * n, n, n) = md.A + BL;
  aug.Acal.block(5 * n, 5 * n, n, n) = MatrixXd::Identity(n, n);

  aug.Bcal = MatrixXd::Zero(d, s);
  aug.Bcal.topRows(n) = ch.Gamma + BL * g.K * ch.Psi;
  aug.Bcal.middleRows(n, 3 * n) = aug.bias.B_hat;

  aug.Kcal = MatrixXd::Zero(d, p);
  aug.Kcal.topRows(n) = g.K;
  aug.Kcal.middleRows(4 * n, n) = g.K;

  aug.C_tilde = MatrixXd::Zero(p, d);
  aug.C_tilde.middleCols(n, 3 * n) = aug.bias.C_hat;
  aug.D_tilde = ch.Psi;

  aug.H = MatrixXd::Zero(n, d);
  aug.H.leftCols(n) = MatrixXd::Identity(n, n);
  aug.H.rightCols(n) = -MatrixXd::Identity(n, n);

  aug.G = MatrixXd::Zero(3 * n, d);
  aug.G.middleCols(n, 3 * n) = MatrixXd::Identity(3 * n, 3 * n);

  return aug;
}

VectorXd AugmentedSystem::make_xi(const VectorXd& xtilde, const VectorXd& theta,
                                  const VectorXd& xhat0) const {
  VectorXd xi(dim());
  xi.segment(0, n) = xtilde;
  xi.segment(n, 3 * n) = theta;
  xi.segment(4 * n, n) = xhat0;
  xi.segment(5 * n, n) = x_star;
  return xi;
}

RiccatiLadder riccati_ladder(const BiasSystem& bs, const MatrixXd& sigma_nu_inv,
                             int N) {
  if (N < 1) throw DomainError("riccati_ladder: N must be >= 1");
  RiccatiLadder lad;
  lad.P_hats.reserve(N + 2);
  lad.P_hats.push_back(MatrixXd::Zero(3 * bs.n, 3 * bs.n));

  // Square-root form of the one-step minimization: stack the stage residual
  // and the propagated-energy factor, project out the attack directions, and
  // square the remainder. Keeps every entry PSD by construction, which the
  // Schur-complement form does not guarantee under ill conditioning.
  const MatrixXd Wsq = psd_sqrt(sigma_nu_inv);
  const int n3 = 3 * bs.n;
  lad.gains.reserve(N + 2);
  lad.gains.push_back(MatrixXd());  // no 0-step plan
  for (int k = 0; k < N + 1; ++k) {
    const MatrixXd E = psd_sqrt(lad.P_hats.back());
    MatrixXd R(bs.p + n3, n3), S(bs.p + n3, bs.s);
    R.topRows(bs.p) = Wsq * bs.C_hat;
    R.bottomRows(n3) = E * bs.A_hat;
    S.topRows(bs.p) = Wsq * bs.D_hat;
    S.bottomRows(n3) = E * bs.B_hat;
    MatrixXd Sdag_R = pinv(S) * R;
    MatrixXd Rres = R - S * Sdag_R;
    lad.P_hats.push_back(symmetrize(Rres.transpose() * Rres));
    lad.gains.push_back(std::move(Sdag_R));
  }
  return lad;
}

double min_bias_energy(const VectorXd& theta, const RiccatiLadder& ladder, int k) {
  if (k < 1 || k >= static_cast<int>(ladder.P_hats.size()))
    throw IndexOutOfRange("min_bias_energy: ladder index out of range");
  return std::max(0.0, theta.dot(ladder.P_hats[k] * theta));
}

bool zero_delta_feasible(const VectorXd& xi, int t, const RiccatiLadder& ladder,
                         const AugmentedSystem& aug, double tol) {
  const int N = static_cast<int>(ladder.P_hats.size()) - 2;
  if (t < 0 || t > N) throw IndexOutOfRange("zero_delta_feasible: bad time index");
  VectorXd r = ladder.P_hats[N - t + 1] * (aug.G * xi);
  return r.norm() <= tol * (1.0 + xi.norm());
}

HorizonMaps stack_horizon_maps(const AugmentedSystem& aug, int t_start, int t_end) {
  if (t_start > t_end) throw DomainError("stack_horizon_maps: empty horizon");
  const BiasSystem& bs = aug.bias;
  const int T = t_end - t_start + 1;
  const int p = bs.p, s = bs.s, n3 = 3 * bs.n;

  HorizonMaps maps;
  maps.steps = T;
  maps.obs = MatrixXd::Zero(T * p, n3);
  maps.toeplitz = MatrixXd::Zero(T * p, T * s);

  MatrixXd pow = MatrixXd::Identity(n3, n3);  // A_hat^j
  for (int j = 0; j < T; ++j) {
    maps.obs.middleRows(j * p, p) = bs.C_hat * pow;
    pow = bs.A_hat * pow;
  }
  // Markov parameters: block (j, i) of toeplitz for i < j is
  // C_hat A_hat^{j-1-i} B_hat; block (j, j) is D_hat.
  std::vector<MatrixXd> cab(T);
  MatrixXd acc = bs.B_hat;
  for (int j = 1; j < T; ++j) {
    cab[j] = bs.C_hat * acc;  // C_hat A_hat^{j-1} B_hat
    acc = bs.A_hat * acc;
  }
  for (int j = 0; j < T; ++j) {
    maps.toeplitz.block(j * p, j * s, p, s) = bs.D_hat;
    for (int i = 0; i < j; ++i)
      maps.toeplitz.block(j * p, i * s, p, s) = cab[j - i];
  }
  return maps;
}

}  // namespace cps
