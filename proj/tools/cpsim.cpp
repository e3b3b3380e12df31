#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "cps/errors.hpp"
#include "cps/linalg.hpp"
#include "cps/sim.hpp"

namespace {

using namespace cps;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedFile("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw MalformedFile("cannot open " + out_path + " for writing");
  out << content;
}

struct CommonFlags {
  std::string scenario_path;
  std::string out_path;
  std::string strategy;
  int window = 0;
  double delta = -1.0;  // <0 means "use scenario value"
  int runs = 100;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string windows = "2,3,5,10";
};

ScenarioConfig load_and_validate(const CommonFlags& f) {
  ScenarioConfig cfg = parse_scenario(read_file(f.scenario_path));
  ValidationReport rep = validate_scenario(cfg);
  if (!rep.pass) {
    for (const auto& c : rep.checks)
      if (!c.pass) std::cerr << "validation failed: " << c.name << " (" << c.detail << ")\n";
    throw MalformedFile("scenario failed validation");
  }
  if (f.delta >= 0.0) cfg.objective.delta = f.delta;
  if (f.seed_set) cfg.seed = f.seed;
  if (!f.strategy.empty()) {
    if (f.strategy == "eq") cfg.strategy.kind = StrategyKind::ZeroDelta;
    else if (f.strategy == "opt") cfg.strategy.kind = StrategyKind::OptimalDelta;
    else if (f.strategy == "win") cfg.strategy.kind = StrategyKind::Windowed;
    else throw MalformedFile("unknown strategy: " + f.strategy);
  }
  if (f.window > 0) cfg.strategy.W = f.window;
  return cfg;
}

int cmd_gains(const CommonFlags& f) {
  ScenarioConfig cfg = load_and_validate(f);
  SimSetup su = prepare_setup(cfg);
  std::string out;
  out += "K\n" + matrix_to_text(su.filt.K);
  out += "L\n" + matrix_to_text(su.ctrl.L);
  out += "Sigma_nu\n" + matrix_to_text(su.filt.Sigma_nu);
  out += "tau " + std::to_string(su.detector.tau) + "\n";
  out += "ladder_summary\nk,rank,min_eig,max_eig\n";
  for (std::size_t k = 0; k < su.ladder.P_hats.size(); ++k) {
    const MatrixXd& P = su.ladder.P_hats[k];
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(P);
    out += std::to_string(k) + "," + std::to_string(numerical_rank(P)) + "," +
           std::to_string(es.eigenvalues().minCoeff()) + "," +
           std::to_string(es.eigenvalues().maxCoeff()) + "\n";
  }
  write_output(f.out_path, out);
  return 0;
}

int cmd_simulate(const CommonFlags& f) {
  ScenarioConfig cfg = load_and_validate(f);
  SimSetup su = prepare_setup(cfg);
  AttackStrategy strat = make_strategy(su, cfg.strategy, cfg.objective.delta);
  SimTrace trace = simulate_closed_loop(su, strat, cfg.seed);
  write_output(f.out_path, trace_to_csv(trace, su));
  CostReport rep = realized_cost(trace, cfg.objective.Q_stage, cfg.objective.x_star,
                                 su.filt);
  std::cerr << "realized_cost " << rep.realized << " constant_part "
            << rep.constant_part << "\n";
  return 0;
}

int cmd_montecarlo(const CommonFlags& f) {
  ScenarioConfig cfg = load_and_validate(f);
  SimSetup su = prepare_setup(cfg);
  MonteCarloSummary sum =
      monte_carlo(su, cfg.strategy, cfg.objective.delta, f.runs, cfg.seed);
  write_output(f.out_path, summary_to_csv(sum));
  return 0;
}

int cmd_sweep_gap(const CommonFlags& f) {
  ScenarioConfig cfg = load_and_validate(f);
  SimSetup su = prepare_setup(cfg);
  std::vector<int> ws;
  {
    std::stringstream ss(f.windows);
    std::string tok;
    while (std::getline(ss, tok, ',')) ws.push_back(std::stoi(tok));
  }
  std::string out = "window,mean_cost,cost_stderr\n";
  char buf[64];
  // Common random numbers: every window size replays the same seed set.
  for (int W : ws) {
    StrategySpec spec{StrategyKind::Windowed, W};
    MonteCarloSummary sum =
        monte_carlo(su, spec, cfg.objective.delta, f.runs, cfg.seed);
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", W, sum.mean_cost,
                  sum.cost_stderr);
    out += buf;
  }
  StrategySpec full{StrategyKind::OptimalDelta, 0};
  MonteCarloSummary base =
      monte_carlo(su, full, cfg.objective.delta, f.runs, cfg.seed);
  std::snprintf(buf, sizeof buf, "opt,%.17g,%.17g\n", base.mean_cost,
                base.cost_stderr);
  out += buf;
  write_output(f.out_path, out);
  return 0;
}

int cmd_validate(const CommonFlags& f) {
  ScenarioConfig cfg = parse_scenario(read_file(f.scenario_path));
  ValidationReport rep = validate_scenario(cfg);
  std::string out;
  for (const auto& c : rep.checks)
    out += (c.pass ? "PASS " : "FAIL ") + c.name +
           (c.detail.empty() ? "" : " (" + c.detail + ")") + "\n";
  out += rep.pass ? "OVERALL PASS\n" : "OVERALL FAIL\n";
  write_output(f.out_path, out);
  return rep.pass ? 0 : 3;
}

int cmd_export(const CommonFlags& f) {
  ScenarioConfig cfg = load_and_validate(f);
  SimSetup su = prepare_setup(cfg);
  std::string out;
  out += "A_hat\n" + matrix_to_text(su.aug.bias.A_hat);
  out += "B_hat\n" + matrix_to_text(su.aug.bias.B_hat);
  out += "C_hat\n" + matrix_to_text(su.aug.bias.C_hat);
  out += "D_hat\n" + matrix_to_text(su.aug.bias.D_hat);
  out += "Acal\n" + matrix_to_text(su.aug.Acal);
  out += "Bcal\n" + matrix_to_text(su.aug.Bcal);
  out += "Kcal\n" + matrix_to_text(su.aug.Kcal);
  out += "C_tilde\n" + matrix_to_text(su.aug.C_tilde);
  out += "D_tilde\n" + matrix_to_text(su.aug.D_tilde);
  out += "H\n" + matrix_to_text(su.aug.H);
  out += "G\n" + matrix_to_text(su.aug.G);
  write_output(f.out_path, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Integrity-attack simulator for linear control loops"};
  app.require_subcommand(1);

  CommonFlags f;
  auto add_common = [&](CLI::App* sub, bool needs_strategy) {
    sub->add_option("--scenario", f.scenario_path, "scenario file")->required();
    sub->add_option("--out", f.out_path, "output path (default stdout)");
    sub->add_option("--seed", f.seed, "RNG seed override")
        ->each([&](const std::string&) { f.seed_set = true; });
    sub->add_option("--delta", f.delta, "detection budget override");
    if (needs_strategy) {
      sub->add_option("--strategy", f.strategy, "eq|opt|win");
      sub->add_option("--window", f.window, "window size for win");
    }
  };

  auto* gains = app.add_subcommand("gains", "print filter/controller gains");
  add_common(gains, false);
  auto* simulate = app.add_subcommand("simulate", "run one closed-loop trace");
  add_common(simulate, true);
  auto* mc = app.add_subcommand("montecarlo", "aggregate many runs");
  add_common(mc, true);
  mc->add_option("--runs", f.runs, "number of runs");
  auto* sweep = app.add_subcommand("sweep-gap", "window-size cost sweep");
  add_common(sweep, false);
  sweep->add_option("--runs", f.runs, "number of runs per window");
  sweep->add_option("--windows", f.windows, "comma-separated window sizes");
  auto* validate = app.add_subcommand("validate", "run scenario validation");
  validate->add_option("--scenario", f.scenario_path, "scenario file")->required();
  validate->add_option("--out", f.out_path, "output path (default stdout)");
  auto* exp = app.add_subcommand("export", "dump augmented system matrices");
  add_common(exp, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gains->parsed()) return cmd_gains(f);
    if (simulate->parsed()) return cmd_simulate(f);
    if (mc->parsed()) return cmd_montecarlo(f);
    if (sweep->parsed()) return cmd_sweep_gap(f);
    if (validate->parsed()) return cmd_validate(f);
    if (exp->parsed()) return cmd_export(f);
  } catch (const InfeasibleStep& ex) {
    std::cerr << "infeasible: " << ex.what() << "\n";
    return 2;
  } catch (const NoConvergence& ex) {
    std::cerr << "solver failure: " << ex.what() << "\n";
    return 2;
  } catch (const MalformedFile& ex) {
    std::cerr << "scenario error: " << ex.what() << "\n";
    return 3;
  } catch (const MissingField& ex) {
    std::cerr << "scenario error: " << ex.what() << "\n";
    return 3;
  } catch (const DimensionMismatch& ex) {
    std::cerr << "scenario error: " << ex.what() << "\n";
    return 3;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}
