#include "cps/qcqp.hpp"

#include <cmath>
#include <limits>

#include "cps/errors.hpp"
#include "cps/linalg.hpp"

namespace cps {

namespace {
constexpr double kLineSearchAlpha = 0.25;
constexpr double kLineSearchBeta = 0.5;
constexpr double kNewtonDecrementTol = 1e-13;
}  // namespace

double QcqpProblem::constraint_value(int i, const VectorXd& z) const {
  int r0 = row_offsets[i], r1 = row_offsets[i + 1];
  VectorXd r = Acon.middleRows(r0, r1 - r0) * z + bcon.segment(r0, r1 - r0);
  return r.squaredNorm() - rhs(i);
}

double QcqpProblem::max_violation(const VectorXd& z) const {
  double v = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < num_constraints(); ++i)
    v = std::max(v, constraint_value(i, z));
  return v;
}

double QcqpProblem::objective(const VectorXd& z) const {
  return z.dot(Hobj * z) + 2.0 * gobj.dot(z) + cobj;
}

namespace {

struct Slacks {
  VectorXd resid;  // stacked A z + b
  VectorXd q;      // per-constraint rhs_i - ||r_i||^2
  bool interior = false;
};

Slacks eval_slacks(const QcqpProblem& p, const VectorXd& z) {
  Slacks s;
  s.resid = p.Acon * z + p.bcon;
  const int m = p.num_constraints();
  s.q.resize(m);
  s.interior = true;
  for (int i = 0; i < m; ++i) {
    int r0 = p.row_offsets[i], r1 = p.row_offsets[i + 1];
    s.q(i) = p.rhs(i) - s.resid.segment(r0, r1 - r0).squaredNorm();
    if (s.q(i) <= 0.0) s.interior = false;
  }
  return s;
}

double barrier_value(const QcqpProblem& p, const VectorXd& z, double tb,
                     const Slacks& s) {
  if (!s.interior) return std::numeric_limits<double>::infinity();
  double v = tb * (z.dot(p.Hobj * z) + 2.0 * p.gobj.dot(z));
  for (int i = 0; i < p.num_constraints(); ++i) v -= std::log(s.q(i));
  return v;
}

// Newton minimization of the barrier function at fixed tb, starting from a
// strictly feasible z. Returns iterations used.
int newton_centering(const QcqpProblem& p, double tb, VectorXd& z, int max_iter) {
  const int d = p.d;
  const int m = p.num_constraints();
  const int T = p.toeplitz_cross ? p.toeplitz_steps : 0;
  const int sb = p.toeplitz_block;
  Slacks s = eval_slacks(p, z);
  // Generic constraints (everything past the Toeplitz prefix) go through the
  // scaled-row syrk; the prefix is assembled from the cached Gram blocks.
  const int gen_row0 = T > 0 ? p.row_offsets[T] : 0;
  MatrixXd Ascaled(p.Acon.rows() - gen_row0, d);
  MatrixXd U(d, m);
  MatrixXd Hess(d, d);

  for (int it = 0; it < max_iter; ++it) {
    // Gradient and Hessian of tb*f0 + barrier.
    VectorXd grad = tb * (2.0 * (p.Hobj * z) + 2.0 * p.gobj);
    for (int i = 0; i < m; ++i) {
      int r0 = p.row_offsets[i], nr = p.row_offsets[i + 1] - r0;
      double wi = 2.0 / s.q(i);
      if (i >= T)
        Ascaled.middleRows(r0 - gen_row0, nr) =
            std::sqrt(wi) * p.Acon.middleRows(r0, nr);
      VectorXd gi = p.Acon.middleRows(r0, nr).transpose() * s.resid.segment(r0, nr);
      grad.noalias() += wi * gi;
      U.col(i) = wi * gi;
    }
    Hess.setZero();
    if (T > 0) {
      // Block (j, jp), j >= jp, of sum_i w_i A_i^T A_i over the Toeplitz
      // prefix is sum_{i >= j} w_i M_{i-j}^T M_{i-jp}.
      const MatrixXd& cross = *p.toeplitz_cross;
      for (int j = 0; j < T; ++j)
        for (int jp = 0; jp <= j; ++jp) {
          auto blk = Hess.block(j * sb, jp * sb, sb, sb);
          for (int i = j; i < T; ++i)
            blk.noalias() +=
                (2.0 / s.q(i)) * cross.block((i - j) * sb, (i - jp) * sb, sb, sb);
        }
    }
    if (Ascaled.rows() > 0)
      Hess.selfadjointView<Eigen::Lower>().rankUpdate(Ascaled.transpose());
    Hess.selfadjointView<Eigen::Lower>().rankUpdate(U);
    Hess.triangularView<Eigen::Upper>() = Hess.transpose();
    Hess += 2.0 * tb * p.Hobj;

    Eigen::LDLT<MatrixXd> ldlt(Hess);
    VectorXd dz = -ldlt.solve(grad);
    double decrement = -grad.dot(dz);
    if (!(decrement > 0)) {
      // Singular or indefinite numerics: add a ridge and retry once.
      Hess.diagonal().array() += 1e-12 * (1.0 + Hess.diagonal().cwiseAbs().maxCoeff());
      dz = -MatrixXd(Hess).ldlt().solve(grad);
      decrement = -grad.dot(dz);
      if (!(decrement > 0)) return it;
    }
    if (0.5 * decrement < kNewtonDecrementTol * (1.0 + std::fabs(tb))) return it;

    double phi0 = barrier_value(p, z, tb, s);
    double step = 1.0;
    VectorXd zn;
    Slacks sn;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      zn = z + step * dz;
      sn = eval_slacks(p, zn);
      if (sn.interior &&
          barrier_value(p, zn, tb, sn) <= phi0 - kLineSearchAlpha * step * decrement) {
        accepted = true;
        break;
      }
      step *= kLineSearchBeta;
    }
    if (!accepted) return it;  // stalled; keep the last interior iterate
    z = zn;
    s = sn;
  }
  return max_iter;
}

// Phase-I: minimize w subject to f_i(z) <= w, stopping as soon as a point
// with margin-strict feasibility is found. Returns true on success.
bool phase_one(const QcqpProblem& p, VectorXd& z, double margin,
               const QcqpOptions& opts, int* iters_used) {
  const int d = p.d;
  const int m = p.num_constraints();
  VectorXd fvals(m);
  auto eval_f = [&](const VectorXd& zz, VectorXd& f) {
    VectorXd resid = p.Acon * zz + p.bcon;
    for (int i = 0; i < m; ++i) {
      int r0 = p.row_offsets[i], nr = p.row_offsets[i + 1] - r0;
      f(i) = resid.segment(r0, nr).squaredNorm() - p.rhs(i);
    }
  };
  eval_f(z, fvals);
  if (fvals.maxCoeff() < -margin) return true;
  double w = fvals.maxCoeff() + 1.0 + 0.1 * std::fabs(fvals.maxCoeff());

  double tb = 1.0;
  int total = 0;
  while (total < opts.max_total_newton) {
    for (int it = 0; it < opts.max_newton_per_stage; ++it) {
      ++total;
      VectorXd resid = p.Acon * z + p.bcon;
      eval_f(z, fvals);
      if (fvals.maxCoeff() < -margin) {
        if (iters_used) *iters_used += total;
        return true;
      }
      VectorXd slack = VectorXd::Constant(m, w) - fvals;
      // Gradient over (z, w).
      VectorXd gz = VectorXd::Zero(d);
      double gw = tb;
      MatrixXd Ascaled(p.Acon.rows(), d);
      MatrixXd U(d, m);
      VectorXd cross = VectorXd::Zero(d);
      double hww = 0.0;
      for (int i = 0; i < m; ++i) {
        int r0 = p.row_offsets[i], nr = p.row_offsets[i + 1] - r0;
        double si = slack(i);
        VectorXd gi = p.Acon.middleRows(r0, nr).transpose() * resid.segment(r0, nr);
        gz.noalias() += (2.0 / si) * gi;
        gw -= 1.0 / si;
        Ascaled.middleRows(r0, nr) = std::sqrt(2.0 / si) * p.Acon.middleRows(r0, nr);
        U.col(i) = (2.0 / si) * gi;
        cross.noalias() -= (2.0 / (si * si)) * gi;
        hww += 1.0 / (si * si);
      }
      MatrixXd Hess = MatrixXd::Zero(d + 1, d + 1);
      MatrixXd Hzz = MatrixXd::Zero(d, d);
      Hzz.selfadjointView<Eigen::Lower>().rankUpdate(Ascaled.transpose());
      Hzz.selfadjointView<Eigen::Lower>().rankUpdate(U);
      Hzz.triangularView<Eigen::Upper>() = Hzz.transpose();
      Hess.topLeftCorner(d, d) = Hzz;
      Hess.topRightCorner(d, 1) = cross;
      Hess.bottomLeftCorner(1, d) = cross.transpose();
      Hess(d, d) = hww + 1e-12;
      VectorXd grad(d + 1);
      grad.head(d) = gz;
      grad(d) = gw;
      Eigen::LDLT<MatrixXd> ldlt(Hess);
      VectorXd dir = -ldlt.solve(grad);
      double decrement = -grad.dot(dir);
      if (!(decrement > 0) || 0.5 * decrement < kNewtonDecrementTol) break;

      auto phi = [&](const VectorXd& zz, double ww) {
        VectorXd f(m);
        eval_f(zz, f);
        double v = tb * ww;
        for (int i = 0; i < m; ++i) {
          double si = ww - f(i);
          if (si <= 0.0) return std::numeric_limits<double>::infinity();
          v -= std::log(si);
        }
        return v;
      };
      double phi0 = phi(z, w);
      double step = 1.0;
      for (int ls = 0; ls < 60; ++ls) {
        VectorXd zn = z + step * dir.head(d);
        double wn = w + step * dir(d);
        if (phi(zn, wn) <= phi0 - kLineSearchAlpha * step * decrement) {
          z = zn;
          w = wn;
          break;
        }
        step *= kLineSearchBeta;
      }
    }
    // Provable infeasibility: min w >= w - m/tb.
    if (w - m / tb > 0.0) {
      if (iters_used) *iters_used += total;
      return false;
    }
    tb *= opts.barrier_mult;
    if (m / tb < 0.01 * margin && w > -margin) {
      if (iters_used) *iters_used += total;
      return false;
    }
  }
  if (iters_used) *iters_used += total;
  eval_f(z, fvals);
  return fvals.maxCoeff() < -margin;
}

}  // namespace

QcqpSolution solve_qcqp(const QcqpProblem& prob, const std::optional<VectorXd>& warm,
                        const QcqpOptions& opts) {
  const int m = prob.num_constraints();
  QcqpSolution sol;
  VectorXd z = warm ? *warm : VectorXd::Zero(prob.d);

  double rhs_scale = m > 0 ? prob.rhs.cwiseAbs().maxCoeff() : 1.0;
  double margin = opts.interior_margin * (1.0 + rhs_scale);
  // A tiny budget shrinks the whole feasible region below the nominal
  // margin; cap it so strictly feasible points are still recognized.
  double rhs_min = m > 0 ? prob.rhs.minCoeff() : 1.0;
  if (rhs_min > 0.0) margin = std::min(margin, 1e-3 * rhs_min);

  bool warm_strict = false;
  if (m > 0) {
    Slacks s0 = eval_slacks(prob, z);
    // A warm start only needs strict interiority for the barrier to work;
    // points from a previous solve may legitimately hug the boundary, which
    // simply corresponds to a large initial barrier parameter.
    double accept = warm.has_value() ? 0.0 : margin;
    bool strict = s0.interior && s0.q.minCoeff() > accept;
    warm_strict = warm.has_value() && strict;
    if (!strict) {
      int it = 0;
      if (!phase_one(prob, z, margin, opts, &it)) {
        sol.status = QcqpStatus::Infeasible;
        sol.z_star = z;
        sol.objective = prob.objective(z);
        sol.max_violation = prob.max_violation(z);
        sol.newton_iters = it;
        return sol;
      }
      sol.newton_iters += it;
    }
  }

  double tb = (warm_strict && opts.warm_barrier_init > 0.0)
                  ? opts.warm_barrier_init
                  : opts.barrier_init;
  int total = 0;
  bool converged = false;
  while (total < opts.max_total_newton) {
    int used = newton_centering(prob, tb, z, opts.max_newton_per_stage);
    total += std::max(used, 1);
    if (m == 0 || static_cast<double>(m) / tb <= opts.gap_tol * std::max(1, m)) {
      converged = true;
      break;
    }
    tb *= opts.barrier_mult;
  }
  sol.newton_iters += total;
  sol.z_star = z;
  sol.objective = prob.objective(z);
  sol.max_violation = prob.max_violation(z);

  // KKT stationarity residual with the central-path multipliers.
  VectorXd r_kkt = 2.0 * (prob.Hobj * z) + 2.0 * prob.gobj;
  if (m > 0) {
    Slacks s = eval_slacks(prob, z);
    for (int i = 0; i < m; ++i) {
      int r0 = prob.row_offsets[i], nr = prob.row_offsets[i + 1] - r0;
      double lam = 1.0 / (tb * s.q(i));
      r_kkt.noalias() += lam * 2.0 *
          (prob.Acon.middleRows(r0, nr).transpose() * s.resid.segment(r0, nr));
    }
  }
  sol.kkt_residual = r_kkt.norm();
  sol.status = converged ? QcqpStatus::Optimal : QcqpStatus::MaxIter;
  return sol;
}

HorizonQcqpBuilder::HorizonQcqpBuilder(const AugmentedSystem& aug,
                                       const std::vector<MatrixXd>& Q_stage, int N,
                                       const MatrixXd& sigma_nu_inv,
                                       const RiccatiLadder* ladder)
    : aug_(&aug), ladder_(ladder), Q_stage_(Q_stage), N_(N) {
  if (static_cast<int>(Q_stage_.size()) != N + 1)
    throw DimensionMismatch("HorizonQcqpBuilder: Q_stage must have N+1 entries");
  const int n = aug.n, s = aug.s, p = aug.p;

  constant_Q_ = true;
  for (const auto& Q : Q_stage_)
    if ((Q - Q_stage_[0]).cwiseAbs().maxCoeff() != 0.0) {
      constant_Q_ = false;
      break;
    }

  W_ = psd_sqrt(sigma_nu_inv);

  // Markov parameters of the cost and bias channels.
  markov_cost_.resize(N);
  {
    MatrixXd acc = aug.Bcal;
    for (int u = 0; u < N; ++u) {
      markov_cost_[u] = aug.H * acc;
      acc = aug.Acal * acc;
    }
  }
  weighted_bias_.resize(N + 1);
  markov_theta_.resize(N + 1);
  {
    const BiasSystem& bs = aug.bias;
    weighted_bias_[0] = W_ * bs.D_hat;
    MatrixXd acc = bs.B_hat;
    for (int u = 0; u <= N; ++u) {
      markov_theta_[u] = acc;
      if (u + 1 <= N) weighted_bias_[u + 1] = W_ * (bs.C_hat * acc);
      acc = bs.A_hat * acc;
    }
  }

  if (ladder) {
    ladder_sqrt_.resize(ladder->P_hats.size());
    for (std::size_t i = 0; i < ladder->P_hats.size(); ++i)
      ladder_sqrt_[i] = psd_sqrt(ladder->P_hats[i]);
  }

  if (constant_Q_) {
    const MatrixXd& Q = Q_stage_[0];
    sgap_.resize(N);
    for (int gap = 0; gap < N; ++gap) {
      int maxL = N - gap;
      sgap_[gap].resize(maxL + 1);
      sgap_[gap][0] = MatrixXd::Zero(s, s);
      for (int L = 1; L <= maxL; ++L)
        sgap_[gap][L] = sgap_[gap][L - 1] +
                        markov_cost_[L - 1 + gap].transpose() * Q * markov_cost_[L - 1];
    }
  }

  // Weighted bias Toeplitz for the maximum horizon; shorter horizons use the
  // leading principal sub-block.
  toeplitz_full_ = MatrixXd::Zero((N + 1) * p, (N + 1) * s);
  for (int k = 0; k <= N; ++k)
    for (int j = 0; j <= k; ++j)
      toeplitz_full_.block(k * p, j * s, p, s) = weighted_bias_[k - j];

  // Gram blocks M_a^T M_b of the generating blocks, for the solver's
  // structured Hessian assembly.
  MatrixXd V(p, (N + 1) * s);
  for (int u = 0; u <= N; ++u) V.middleCols(u * s, s) = weighted_bias_[u];
  cross_ = V.transpose() * V;
}

QcqpProblem HorizonQcqpBuilder::build(const VectorXd& xi_t, int t, int horizon_end,
                                      double delta,
                                      const std::optional<int>& terminal_ladder_index,
                                      double terminal_bound) const {
  const AugmentedSystem& aug = *aug_;
  const int n = aug.n, s = aug.s, p = aug.p;
  if (t < 0 || horizon_end < t || horizon_end > N_)
    throw IndexOutOfRange("HorizonQcqpBuilder::build: bad horizon");
  if (xi_t.size() != aug.dim())
    throw DimensionMismatch("HorizonQcqpBuilder::build: bad xi dimension");
  const int T = horizon_end - t + 1;
  const int d = T * s;

  // Free (zero-attack, noise-free) propagation of the augmented state.
  std::vector<VectorXd> h(T);        // H xi_free
  std::vector<VectorXd> epsfree(T);  // C_tilde xi_free
  VectorXd xi = xi_t;
  for (int j = 0; j < T; ++j) {
    h[j] = aug.H * xi;
    epsfree[j] = aug.C_tilde * xi;
    xi = aug.Acal * xi;
  }
  VectorXd theta_free_end = aug.G * xi;  // theta at horizon_end + 1

  QcqpProblem prob;
  prob.d = d;
  prob.Hobj = MatrixXd::Zero(d, d);
  prob.gobj = VectorXd::Zero(d);
  prob.cobj = 0.0;

  if (constant_Q_) {
    for (int jp = 0; jp < T; ++jp) {
      int L = T - 1 - jp;
      for (int j = 0; j <= jp; ++j) {
        int gap = jp - j;
        if (L > 0) {
          const MatrixXd& Sg = sgap_[gap].at(L);
          prob.Hobj.block(j * s, jp * s, s, s) = Sg;
          if (j != jp) prob.Hobj.block(jp * s, j * s, s, s) = Sg.transpose();
        }
      }
    }
  } else {
    // Direct assembly from the cost Toeplitz.
    MatrixXd R = MatrixXd::Zero(T * n, d);
    for (int k = 0; k < T; ++k)
      for (int j = 0; j < k; ++j)
        R.block(k * n, j * s, n, s) = markov_cost_[k - 1 - j];
    MatrixXd QR(T * n, d);
    for (int k = 0; k < T; ++k)
      QR.middleRows(k * n, n) = Q_stage_[t + k] * R.middleRows(k * n, n);
    prob.Hobj = R.transpose() * QR;
  }
  prob.Hobj = symmetrize(prob.Hobj);

  for (int k = 0; k < T; ++k) {
    VectorXd v = Q_stage_[t + k] * h[k];
    prob.cobj += h[k].dot(v);
    for (int j = 0; j < k; ++j)
      prob.gobj.segment(j * s, s).noalias() +=
          markov_cost_[k - 1 - j].transpose() * v;
  }

  const bool with_terminal = terminal_ladder_index.has_value();
  const int n3 = 3 * n;
  int total_rows = T * p + (with_terminal ? n3 : 0);
  prob.Acon.resize(total_rows, d);
  prob.bcon.resize(total_rows);
  prob.row_offsets.resize(T + (with_terminal ? 1 : 0) + 1);
  prob.rhs.resize(T + (with_terminal ? 1 : 0));

  prob.Acon.topRows(T * p) = toeplitz_full_.topLeftCorner(T * p, d);
  for (int k = 0; k < T; ++k) {
    prob.bcon.segment(k * p, p) = W_ * epsfree[k];
    prob.row_offsets[k] = k * p;
    prob.rhs(k) = delta;
  }
  prob.row_offsets[T] = T * p;
  prob.toeplitz_steps = T;
  prob.toeplitz_block = s;
  prob.toeplitz_cross = &cross_;

  if (with_terminal) {
    if (ladder_sqrt_.empty())
      throw DomainError("HorizonQcqpBuilder: terminal constraint needs a ladder");
    const MatrixXd& E = ladder_sqrt_.at(*terminal_ladder_index);
    for (int j = 0; j < T; ++j)
      prob.Acon.block(T * p, j * s, n3, s) = E * markov_theta_[T - 1 - j];
    prob.bcon.segment(T * p, n3) = E * theta_free_end;
    prob.rhs(T) = terminal_bound;
    prob.row_offsets[T + 1] = total_rows;
  }

  return prob;
}

QcqpProblem build_horizon_qcqp(const AugmentedSystem& aug,
                               const std::vector<MatrixXd>& Q_stage, int N,
                               const MatrixXd& sigma_nu_inv, const VectorXd& xi_t,
                               int t, int horizon_end, double delta,
                               const std::optional<TerminalConstraint>& terminal) {
  QcqpProblem prob;
  if (!terminal) {
    HorizonQcqpBuilder builder(aug, Q_stage, N, sigma_nu_inv, nullptr);
    prob = builder.build(xi_t, t, horizon_end, delta);
  } else {
    // Wrap the explicit terminal matrix into a one-entry ladder.
    RiccatiLadder lad;
    lad.P_hats.push_back(terminal->P);
    HorizonQcqpBuilder builder(aug, Q_stage, N, sigma_nu_inv, &lad);
    prob = builder.build(xi_t, t, horizon_end, delta, 0, terminal->bound);
  }
  // The temporary builder owns the Gram cache; drop the structure hint so
  // the returned problem never points at freed storage.
  prob.toeplitz_steps = 0;
  prob.toeplitz_block = 0;
  prob.toeplitz_cross = nullptr;
  return prob;
}

}  // namespace cps
