#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "cps/errors.hpp"
#include "cps/linalg.hpp"
#include "cps/policy_eq.hpp"
#include "cps/policy_ineq.hpp"
#include "cps/sim.hpp"
#include "test_support.hpp"

using namespace cps;

TEST_CASE("budgeted replanning keeps every step within the budget") {
  CounterRng rng(61);
  for (int trial = 0; trial < 3; ++trial) {
    ScenarioConfig cfg = testing::random_scenario(rng, 3, 2, 3, 2, 10, 0.5);
    SimSetup su = prepare_setup(cfg);
    for (StrategyKind kind : {StrategyKind::OptimalDelta, StrategyKind::Windowed}) {
      StrategySpec spec{kind, 4};
      MonteCarloSummary mc = monte_carlo(su, spec, 0.5, 20, rng.next_u64());
      CHECK(mc.max_eps_sq.maxCoeff() <= 0.5 * (1.0 + 1e-6));
      CHECK(mc.runs == 20);
    }
  }
}

TEST_CASE("window covering the whole horizon reproduces full replanning") {
  CounterRng rng(62);
  ScenarioConfig cfg = testing::random_scenario(rng, 3, 2, 3, 2, 8, 1.0);
  SimSetup su = prepare_setup(cfg);
  std::uint64_t seed = rng.next_u64();
  AttackStrategy opt = make_strategy(su, {StrategyKind::OptimalDelta, 0}, 1.0);
  AttackStrategy win = make_strategy(su, {StrategyKind::Windowed, cfg.objective.N + 1}, 1.0);
  SimTrace ta = simulate_closed_loop(su, opt, seed);
  SimTrace tb = simulate_closed_loop(su, win, seed);
  REQUIRE(ta.steps.size() == tb.steps.size());
  for (size_t i = 0; i < ta.steps.size(); ++i) {
    CHECK((ta.steps[i].e - tb.steps[i].e).norm() <= 1e-9);
    CHECK((ta.steps[i].x - tb.steps[i].x).norm() <= 1e-9);
  }
}

TEST_CASE("vanishing budget recovers the zero-budget feedback cost") {
  CounterRng rng(63);
  for (int trial = 0; trial < 5; ++trial) {
    ScenarioConfig cfg = testing::random_scenario(rng, 3, 1, 3, 2, 8);
    SimSetup su = prepare_setup(cfg);
    const int N = cfg.objective.N;
    EqPolicy pol = synthesize_eq_policy(su.aug, su.ladder, cfg.objective.Q_stage, N);
    VectorXd xi0 = su.aug.make_xi(testing::random_matrix(rng, 3, 1),
                                  VectorXd::Zero(9),
                                  testing::random_matrix(rng, 3, 1));

    auto rollout = [&](auto&& step_fn) {
      VectorXd xi = xi0;
      double cost = 0.0;
      for (int t = 0; t <= N; ++t) {
        VectorXd e = step_fn(t, xi);
        VectorXd h = su.aug.H * xi;
        cost += h.dot(cfg.objective.Q_stage[t] * h);
        xi = su.aug.Acal * xi + su.aug.Bcal * e;
      }
      return cost;
    };

    double cost_eq = rollout(
        [&](int t, const VectorXd& xi) { return eq_attack_step(pol, t, xi); });

    RecedingHorizonState st;
    auto builder = su.qcqp_builder();
    double cost_tiny = rollout([&](int, const VectorXd& xi) {
      return optimal_attack_step(st, *builder, xi, 1e-10, N);
    });
    CHECK(cost_tiny == doctest::Approx(cost_eq).epsilon(1e-4));
  }
}

TEST_CASE("traces are reproducible from the seed") {
  CounterRng rng(64);
  ScenarioConfig cfg = testing::random_scenario(rng, 4, 2, 3, 2, 12, 0.8);
  SimSetup su = prepare_setup(cfg);
  std::uint64_t seed = 777;
  SimTrace a = simulate_closed_loop(
      su, make_strategy(su, {StrategyKind::Windowed, 3}, 0.8), seed);
  SimTrace b = simulate_closed_loop(
      su, make_strategy(su, {StrategyKind::Windowed, 3}, 0.8), seed);
  REQUIRE(a.steps.size() == b.steps.size());
  for (size_t i = 0; i < a.steps.size(); ++i) {
    CHECK((a.steps[i].x - b.steps[i].x).norm() == 0.0);
    CHECK((a.steps[i].e - b.steps[i].e).norm() == 0.0);
    CHECK((a.steps[i].nu - b.steps[i].nu).norm() == 0.0);
  }
}

TEST_CASE("measured innovation bias equals the attacked/clean gap") {
  CounterRng rng(65);
  ScenarioConfig cfg = testing::random_scenario(rng, 3, 2, 3, 2, 15, 0.5);
  SimSetup su = prepare_setup(cfg);
  SimTrace tr = simulate_closed_loop(
      su, make_strategy(su, {StrategyKind::OptimalDelta, 0}, 0.5), 123);
  for (const SimStep& st : tr.steps) {
    VectorXd gap = st.nu - st.nu0;
    CHECK((gap - st.eps).norm() <= 1e-8 * (1.0 + st.nu.norm()));
  }
}

TEST_CASE("no attack trips the detector at roughly the design rate") {
  CounterRng rng(66);
  ScenarioConfig cfg = testing::random_scenario(rng, 3, 2, 3, 2, 2000);
  cfg.warmup = 0;
  SimSetup su = prepare_setup(cfg);
  AttackStrategy none = [&](int, const VectorXd&) { return VectorXd::Zero(2); };
  int alarms = 0, steps = 0;
  for (std::uint64_t r = 0; r < 4; ++r) {
    SimTrace tr = simulate_closed_loop(su, none, 9000 + r);
    for (const SimStep& st : tr.steps) {
      alarms += st.alarm ? 1 : 0;
      ++steps;
    }
  }
  double alpha = *cfg.alpha;
  double sigma = std::sqrt(alpha * (1.0 - alpha) / steps);
  CHECK(std::fabs(double(alarms) / steps - alpha) <= 3.0 * sigma);
}

TEST_CASE("trace CSV carries the recorded values verbatim") {
  CounterRng rng(67);
  ScenarioConfig cfg = testing::random_scenario(rng, 2, 1, 2, 1, 5);
  cfg.warmup = 2;
  SimSetup su = prepare_setup(cfg);
  SimTrace tr = simulate_closed_loop(
      su, make_strategy(su, {StrategyKind::ZeroDelta, 0}, 0.0), 42);
  std::string csv = trace_to_csv(tr, su);
  std::istringstream in(csv);
  std::string line;
  REQUIRE(std::getline(in, line));  // header
  CHECK(line.rfind("t,", 0) == 0);
  for (const SimStep& st : tr.steps) {
    REQUIRE(std::getline(in, line));
    std::istringstream fields(line);
    std::string cell;
    REQUIRE(std::getline(fields, cell, ','));
    CHECK(std::atoi(cell.c_str()) == st.t);
    std::vector<double> vals;
    while (std::getline(fields, cell, ',')) vals.push_back(std::strtod(cell.c_str(), nullptr));
    REQUIRE(static_cast<int>(vals.size()) == 4 * 2 + 1 + 1 + 4);
    CHECK(vals[0] == st.x(0));  // round-trip at full precision
    CHECK(vals[1] == st.x(1));
    CHECK(vals.back() == (st.alarm ? 1.0 : 0.0));
  }
}

TEST_CASE("strategy construction rejects a non-positive budget") {
  CounterRng rng(68);
  ScenarioConfig cfg = testing::random_scenario(rng, 2, 1, 2, 1, 5);
  SimSetup su = prepare_setup(cfg);
  CHECK_THROWS_AS(make_strategy(su, {StrategyKind::OptimalDelta, 0}, 0.0),
                  DomainError);
  // A window of one step cannot carry the recursive-feasibility handoff;
  // the rejection happens on first use.
  AttackStrategy w1 = make_strategy(su, {StrategyKind::Windowed, 1}, 1.0);
  VectorXd xi0 = su.aug.make_xi(VectorXd::Zero(2), VectorXd::Zero(6),
                                VectorXd::Zero(2));
  CHECK_THROWS_AS(w1(0, xi0), DomainError);
}
