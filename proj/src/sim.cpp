#include "cps/sim.hpp"

#include <cmath>
#include <cstdio>

#include "cps/errors.hpp"
#include "cps/linalg.hpp"
#include "cps/policy_ineq.hpp"
#include "cps/rng.hpp"

namespace cps {

std::shared_ptr<const EqPolicy> SimSetup::eq_policy() const {
  if (!eq_)
    eq_ = std::make_shared<const EqPolicy>(synthesize_eq_policy(
        aug, ladder, cfg.objective.Q_stage, cfg.objective.N));
  return eq_;
}

std::shared_ptr<const HorizonQcqpBuilder> SimSetup::qcqp_builder() const {
  if (!builder_)
    builder_ = std::make_shared<const HorizonQcqpBuilder>(
        aug, cfg.objective.Q_stage, cfg.objective.N, filt.Sigma_nu_inv, &ladder);
  return builder_;
}

SimSetup prepare_setup(const ScenarioConfig& cfg) {
  SimSetup su;
  su.cfg = cfg;
  su.filt = steady_state_gains(cfg.model);
  su.ctrl = lqg_feedback_gain(cfg.model, cfg.controller);
  su.detector = cfg.tau ? DetectorConfig::from_tau(cfg.model.p, *cfg.tau)
                        : DetectorConfig::from_alpha(cfg.model.p, *cfg.alpha);
  su.aug = build_augmented(cfg.model, cfg.channel, su.filt, su.ctrl,
                           cfg.objective.x_star);
  su.ladder = riccati_ladder(su.aug.bias, su.filt.Sigma_nu_inv, cfg.objective.N);
  su.chol_x = cholesky_lower(cfg.model.Sigma_x);
  su.chol_w = cholesky_lower(cfg.model.Sigma_w);
  su.chol_v = cholesky_lower(cfg.model.Sigma_v);
  return su;
}

AttackStrategy make_strategy(const SimSetup& setup, const StrategySpec& spec,
                             double delta) {
  const int N = setup.cfg.objective.N;
  switch (spec.kind) {
    case StrategyKind::ZeroDelta: {
      auto pol = setup.eq_policy();
      return [pol](int t, const VectorXd& xi) { return eq_attack_step(*pol, t, xi); };
    }
    case StrategyKind::OptimalDelta: {
      if (delta <= 0.0)
        throw DomainError("make_strategy: the budgeted attack needs delta > 0");
      auto builder = setup.qcqp_builder();
      auto state = std::make_shared<RecedingHorizonState>();
      QcqpOptions opts;
      opts.gap_tol = 1e-6;  // plenty for simulation-scale costs
      return [builder, state, delta, N, opts](int t, const VectorXd& xi) {
        if (t != state->t)
          throw IndexOutOfRange("attack strategy stepped out of order");
        return optimal_attack_step(*state, *builder, xi, delta, N, opts);
      };
    }
    case StrategyKind::Windowed: {
      if (delta <= 0.0)
        throw DomainError("make_strategy: the budgeted attack needs delta > 0");
      const int W = spec.W;
      auto builder = setup.qcqp_builder();
      auto state = std::make_shared<RecedingHorizonState>();
      QcqpOptions opts;
      opts.gap_tol = 1e-6;
      return [builder, state, delta, W, N, opts](int t, const VectorXd& xi) {
        if (t != state->t)
          throw IndexOutOfRange("attack strategy stepped out of order");
        return windowed_attack_step(*state, *builder, xi, delta, W, N, opts);
      };
    }
  }
  throw DomainError("make_strategy: unknown strategy kind");
}

SimTrace simulate_closed_loop(const SimSetup& su, const AttackStrategy& strategy,
                              std::uint64_t seed) {
  const SystemModel& md = su.cfg.model;
  const AttackChannel& ch = su.cfg.channel;
  const int n = md.n, p = md.p, s = ch.s;
  const int N = su.cfg.objective.N;
  const int warmup = su.cfg.warmup;

  CounterRng rng(seed);
  VectorXd x = su.chol_x * rng.gaussian_vector(n);
  VectorXd x0 = x;  // attack-free twin starts identical

  FilterState f_sys{VectorXd::Zero(n), VectorXd::Zero(n)};
  FilterState f_twin = f_sys;
  FilterState f_att = f_sys;
  VectorXd theta = VectorXd::Zero(3 * n);

  SimTrace trace;
  trace.warmup = warmup;
  trace.N = N;
  trace.seed = seed;
  trace.tau = su.detector.tau;
  trace.steps.reserve(warmup + N + 1);

  for (int t = -warmup; t <= N; ++t) {
    VectorXd w = su.chol_w * rng.gaussian_vector(n);
    VectorXd v = su.chol_v * rng.gaussian_vector(p);

    // Attacker-side measurement update: the sensor injection is known to the
    // attacker, so its filter sees the clean output of the attacked plant.
    VectorXd y_clean = md.C * x + v;
    VectorXd nu_att = y_clean - md.C * f_att.xpred;
    VectorXd xtilde = f_att.xpred + su.filt.K * nu_att;

    // Attack-free twin driven by the same noise realizations.
    VectorXd y_twin = md.C * x0 + v;
    VectorXd nu0 = y_twin - md.C * f_twin.xpred;
    f_twin.xhat = f_twin.xpred + su.filt.K * nu0;
    VectorXd u0 = su.ctrl.L * f_twin.xhat;
    VectorXd xhat0 = f_twin.xhat;
    f_twin.xpred = md.A * f_twin.xhat + md.B * u0;

    VectorXd e = VectorXd::Zero(s);
    if (t >= 0) {
      VectorXd xi = su.aug.make_xi(xtilde, theta, xhat0);
      e = strategy(t, xi);
      if (e.size() != s)
        throw DimensionMismatch("strategy returned an attack of wrong size");
    }

    // System-side filter and controller see the attacked output.
    VectorXd y = y_clean + ch.Psi * e;
    VectorXd nu = y - md.C * f_sys.xpred;
    f_sys.xhat = f_sys.xpred + su.filt.K * nu;
    VectorXd u = su.ctrl.L * f_sys.xhat;
    f_sys.xpred = md.A * f_sys.xhat + md.B * u;

    DetectorResult det = detector_step(nu, su.filt.Sigma_nu_inv, su.detector);

    SimStep step;
    step.t = t;
    step.x = x;
    step.xhat = f_sys.xhat;
    step.xtilde = xtilde;
    step.xhat0 = xhat0;
    step.u = u;
    step.e = e;
    step.y = y;
    step.nu = nu;
    step.nu0 = nu0;
    step.eps = nu - nu0;
    step.g = det.g;
    step.alarm = det.alarm;
    trace.steps.push_back(std::move(step));

    // Advance the plant, twin plant, attacker filter, and bias recursion.
    x = md.A * x + md.B * u + ch.Gamma * e + w;
    x0 = md.A * x0 + md.B * u0 + w;
    VectorXd u_known = u;  // the attacker reconstructs the applied control
    f_att.xhat = xtilde;
    f_att.xpred = md.A * xtilde + md.B * u_known + ch.Gamma * e;
    theta = su.aug.bias.A_hat * theta + su.aug.bias.B_hat * e;
  }
  return trace;
}

CostReport realized_cost(const SimTrace& trace, const std::vector<MatrixXd>& Q_stage,
                         const VectorXd& x_star, const FilterGains& filt) {
  if (static_cast<int>(Q_stage.size()) != trace.N + 1)
    throw DimensionMismatch("realized_cost: Q_stage must have N+1 entries");
  CostReport rep;
  for (const SimStep& st : trace.steps) {
    if (st.t < 0) continue;
    VectorXd d = st.x - x_star;
    rep.realized += d.dot(Q_stage[st.t] * d);
    rep.constant_part += (filt.P_hat * Q_stage[st.t]).trace();
  }
  return rep;
}

MonteCarloSummary monte_carlo(const SimSetup& su, const StrategySpec& spec,
                              double delta, int runs, std::uint64_t base_seed) {
  if (runs < 1) throw DomainError("monte_carlo: runs must be >= 1");
  const int N = su.cfg.objective.N;
  const int n = su.cfg.model.n;

  MonteCarloSummary sum;
  sum.runs = runs;
  sum.mean_eps_sq = VectorXd::Zero(N + 1);
  sum.max_eps_sq = VectorXd::Zero(N + 1);
  sum.alarm_freq = VectorXd::Zero(N + 1);
  sum.mean_g = VectorXd::Zero(N + 1);
  sum.mean_final_state = VectorXd::Zero(n);

  double cost_sum = 0.0, cost_sq_sum = 0.0;
  long alarms = 0;
  for (int r = 0; r < runs; ++r) {
    SimTrace trace;
    try {
      AttackStrategy strat = make_strategy(su, spec, delta);
      trace = simulate_closed_loop(su, strat, base_seed + static_cast<std::uint64_t>(r));
    } catch (const std::exception& ex) {
      throw NoConvergence("monte_carlo: run " + std::to_string(r) + " failed: " +
                          ex.what());
    }
    CostReport rep = realized_cost(trace, su.cfg.objective.Q_stage,
                                   su.cfg.objective.x_star, su.filt);
    sum.constant_part = rep.constant_part;
    cost_sum += rep.realized;
    cost_sq_sum += rep.realized * rep.realized;
    for (const SimStep& st : trace.steps) {
      if (st.t < 0) continue;
      double es = st.eps.dot(su.filt.Sigma_nu_inv * st.eps);
      sum.mean_eps_sq(st.t) += es;
      sum.max_eps_sq(st.t) = std::max(sum.max_eps_sq(st.t), es);
      sum.mean_g(st.t) += st.g;
      if (st.alarm) {
        sum.alarm_freq(st.t) += 1.0;
        ++alarms;
      }
    }
    const SimStep& last = trace.steps.back();
    sum.mean_final_state += last.x;
    sum.mean_final_deviation += (last.x - su.cfg.objective.x_star).norm();
  }
  sum.mean_cost = cost_sum / runs;
  double var = runs > 1
                   ? (cost_sq_sum - runs * sum.mean_cost * sum.mean_cost) / (runs - 1)
                   : 0.0;
  sum.cost_stderr = std::sqrt(std::max(0.0, var) / runs);
  sum.mean_eps_sq /= runs;
  sum.mean_g /= runs;
  sum.alarm_freq /= runs;
  sum.overall_alarm_freq =
      static_cast<double>(alarms) / (static_cast<double>(runs) * (N + 1));
  sum.mean_final_state /= runs;
  sum.mean_final_deviation /= runs;
  return sum;
}

double bias_oracle_check(const SimSetup& su,
                         const std::vector<VectorXd>& attack_sequence,
                         std::uint64_t seed) {
  const int s = su.cfg.channel.s;
  AttackStrategy strat = [&](int t, const VectorXd&) {
    return t < static_cast<int>(attack_sequence.size()) ? attack_sequence[t]
                                                        : VectorXd::Zero(s);
  };
  SimTrace trace = simulate_closed_loop(su, strat, seed);

  // Independent iteration of the bias recursion.
  const BiasSystem& bs = su.aug.bias;
  VectorXd theta = VectorXd::Zero(3 * bs.n);
  double worst = 0.0;
  for (const SimStep& st : trace.steps) {
    if (st.t < 0) continue;
    VectorXd eps_pred = bs.C_hat * theta + bs.D_hat * st.e;
    worst = std::max(worst,
                     (st.eps - eps_pred).norm() / (1.0 + eps_pred.norm()));
    theta = bs.A_hat * theta + bs.B_hat * st.e;
  }
  return worst;
}

namespace {
void append_num(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}
void append_vec(std::string& out, const VectorXd& v) {
  for (int i = 0; i < v.size(); ++i) {
    out += ',';
    append_num(out, v(i));
  }
}
}  // namespace

std::string trace_to_csv(const SimTrace& trace, const SimSetup& su) {
  const int n = su.cfg.model.n, m = su.cfg.model.m, s = su.cfg.channel.s;
  std::string out = "t";
  auto head = [&](const char* base, int k) {
    for (int i = 1; i <= k; ++i) out += "," + std::string(base) + "_" + std::to_string(i);
  };
  head("x", n);
  head("xhat", n);
  head("xtilde", n);
  head("xhat0", n);
  head("u", m);
  head("e", s);
  out += ",nu_norm2,eps_norm2,g,alarm\n";
  for (const SimStep& st : trace.steps) {
    out += std::to_string(st.t);
    append_vec(out, st.x);
    append_vec(out, st.xhat);
    append_vec(out, st.xtilde);
    append_vec(out, st.xhat0);
    append_vec(out, st.u);
    append_vec(out, st.e);
    out += ',';
    append_num(out, st.nu.squaredNorm());
    out += ',';
    append_num(out, st.eps.dot(su.filt.Sigma_nu_inv * st.eps));
    out += ',';
    append_num(out, st.g);
    out += ',';
    out += st.alarm ? '1' : '0';
    out += '\n';
  }
  return out;
}

std::string summary_to_csv(const MonteCarloSummary& s) {
  std::string out = "t,mean_eps_sq,max_eps_sq,alarm_freq,mean_g\n";
  for (int t = 0; t < s.mean_eps_sq.size(); ++t) {
    out += std::to_string(t);
    out += ',';
    append_num(out, s.mean_eps_sq(t));
    out += ',';
    append_num(out, s.max_eps_sq(t));
    out += ',';
    append_num(out, s.alarm_freq(t));
    out += ',';
    append_num(out, s.mean_g(t));
    out += '\n';
  }
  out += "# runs,";
  out += std::to_string(s.runs);
  out += "\n# mean_cost,";
  append_num(out, s.mean_cost);
  out += "\n# cost_stderr,";
  append_num(out, s.cost_stderr);
  out += "\n# constant_part,";
  append_num(out, s.constant_part);
  out += "\n# overall_alarm_freq,";
  append_num(out, s.overall_alarm_freq);
  out += "\n# mean_final_deviation,";
  append_num(out, s.mean_final_deviation);
  out += "\n# mean_final_state";
  append_vec(out, s.mean_final_state);
  out += '\n';
  return out;
}

}  // namespace cps
