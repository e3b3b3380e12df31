#include "cps/scenario.hpp"

#include <json.hpp>

#include "cps/errors.hpp"
#include "cps/linalg.hpp"

namespace cps {

using nlohmann::json;

namespace {

MatrixXd parse_matrix(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw MalformedFile("matrix '" + name + "' must be an array of row arrays");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  MatrixXd M(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw MalformedFile("matrix '" + name + "' has ragged rows");
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number())
        throw MalformedFile("matrix '" + name + "' has a non-numeric entry");
      M(i, k) = j[i][k].get<double>();
    }
  }
  return M;
}

VectorXd parse_vector(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty())
    throw MalformedFile("vector '" + name + "' must be a nonempty array");
  VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw MalformedFile("vector '" + name + "' has a non-numeric entry");
    v(i) = j[i].get<double>();
  }
  return v;
}

const json& field(const json& j, const std::string& name) {
  auto it = j.find(name);
  if (it == j.end()) throw MissingField("missing field '" + name + "'");
  return *it;
}

void require_shape(const MatrixXd& M, int rows, int cols, const std::string& name) {
  if (M.rows() != rows || M.cols() != cols)
    throw DimensionMismatch("matrix '" + name + "' is " + std::to_string(M.rows()) +
                            "x" + std::to_string(M.cols()) + ", expected " +
                            std::to_string(rows) + "x" + std::to_string(cols));
}

json matrix_to_json(const MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
    rows.push_back(row);
  }
  return rows;
}

json vector_to_json(const VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

// Rank of the stacked map [M; MA; ...; MA^{n-1}].
int staircase_rank(const MatrixXd& A, const MatrixXd& M) {
  const int n = static_cast<int>(A.rows());
  MatrixXd stack(M.rows() * n, n);
  MatrixXd cur = M;
  for (int i = 0; i < n; ++i) {
    stack.middleRows(i * M.rows(), M.rows()) = cur;
    cur = cur * A;
  }
  return numerical_rank(stack);
}

int controllability_rank(const MatrixXd& A, const MatrixXd& B) {
  const int n = static_cast<int>(A.rows());
  MatrixXd stack(n, B.cols() * n);
  MatrixXd cur = B;
  for (int i = 0; i < n; ++i) {
    stack.middleCols(i * B.cols(), B.cols()) = cur;
    cur = A * cur;
  }
  return numerical_rank(stack);
}

ValidationCheck pd_check(const std::string& name, const MatrixXd& S) {
  double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  double mineig = min_eigenvalue(S);
  bool sym = (S - S.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale;
  bool pass = sym && mineig > 1e-10 * scale;
  return {name, pass, mineig, sym ? "min eigenvalue" : "not symmetric"};
}

}  // namespace

const ValidationCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

ScenarioConfig parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw MalformedFile(std::string("scenario parse error: ") + e.what());
  }

  ScenarioConfig cfg;

  const json& jm = field(j, "model");
  cfg.model.A = parse_matrix(field(jm, "A"), "model.A");
  cfg.model.B = parse_matrix(field(jm, "B"), "model.B");
  cfg.model.C = parse_matrix(field(jm, "C"), "model.C");
  const int n = static_cast<int>(cfg.model.A.rows());
  const int m = static_cast<int>(cfg.model.B.cols());
  const int p = static_cast<int>(cfg.model.C.rows());
  cfg.model.n = n;
  cfg.model.m = m;
  cfg.model.p = p;
  require_shape(cfg.model.A, n, n, "model.A");
  require_shape(cfg.model.B, n, m, "model.B");
  require_shape(cfg.model.C, p, n, "model.C");
  cfg.model.Sigma_w = parse_matrix(field(jm, "Sigma_w"), "model.Sigma_w");
  cfg.model.Sigma_v = parse_matrix(field(jm, "Sigma_v"), "model.Sigma_v");
  cfg.model.Sigma_x = parse_matrix(field(jm, "Sigma_x"), "model.Sigma_x");
  require_shape(cfg.model.Sigma_w, n, n, "model.Sigma_w");
  require_shape(cfg.model.Sigma_v, p, p, "model.Sigma_v");
  require_shape(cfg.model.Sigma_x, n, n, "model.Sigma_x");

  const json& jc = field(j, "channel");
  cfg.channel.Gamma = parse_matrix(field(jc, "Gamma"), "channel.Gamma");
  cfg.channel.Psi = parse_matrix(field(jc, "Psi"), "channel.Psi");
  const int s = static_cast<int>(cfg.channel.Gamma.cols());
  cfg.channel.s = s;
  require_shape(cfg.channel.Gamma, n, s, "channel.Gamma");
  require_shape(cfg.channel.Psi, p, s, "channel.Psi");

  const json& jsim = field(j, "sim");
  cfg.objective.N = field(jsim, "N").get<int>();
  if (cfg.objective.N < 1) throw MalformedFile("sim.N must be >= 1");
  cfg.objective.delta = field(jsim, "delta").get<double>();
  if (cfg.objective.delta < 0.0) throw MalformedFile("sim.delta must be nonnegative");
  cfg.warmup = field(jsim, "warmup").get<int>();
  if (cfg.warmup < 0) throw MalformedFile("sim.warmup must be nonnegative");
  cfg.seed = field(jsim, "seed").get<std::uint64_t>();
  const json& jstrat = field(jsim, "strategy");
  std::string kind = field(jstrat, "kind").get<std::string>();
  if (kind == "eq") {
    cfg.strategy.kind = StrategyKind::ZeroDelta;
  } else if (kind == "opt") {
    cfg.strategy.kind = StrategyKind::OptimalDelta;
  } else if (kind == "win") {
    cfg.strategy.kind = StrategyKind::Windowed;
    cfg.strategy.W = field(jstrat, "W").get<int>();
  } else {
    throw MalformedFile("strategy.kind must be one of eq|opt|win");
  }

  const json& jo = field(j, "objective");
  cfg.objective.x_star = parse_vector(field(jo, "x_star"), "objective.x_star");
  if (cfg.objective.x_star.size() != n)
    throw DimensionMismatch("objective.x_star has wrong dimension");
  const json& jq = field(jo, "Q_stage");
  if (jq.is_array() && !jq.empty() && jq[0].is_array() && !jq[0].empty() &&
      jq[0][0].is_array()) {
    // List of per-t matrices.
    if (static_cast<int>(jq.size()) != cfg.objective.N + 1)
      throw DimensionMismatch("objective.Q_stage list must have N+1 entries");
    for (std::size_t i = 0; i < jq.size(); ++i) {
      MatrixXd Q = parse_matrix(jq[i], "objective.Q_stage[" + std::to_string(i) + "]");
      require_shape(Q, n, n, "objective.Q_stage entry");
      cfg.objective.Q_stage.push_back(std::move(Q));
    }
  } else {
    MatrixXd Q = parse_matrix(jq, "objective.Q_stage");
    require_shape(Q, n, n, "objective.Q_stage");
    cfg.objective.Q_stage.assign(cfg.objective.N + 1, Q);
  }

  // Controller weights default to identity when omitted.
  cfg.controller.Q_prime = MatrixXd::Identity(n, n);
  cfg.controller.R_prime = MatrixXd::Identity(m, m);
  if (j.contains("controller")) {
    const json& jctl = j["controller"];
    if (jctl.contains("Q_prime")) {
      cfg.controller.Q_prime = parse_matrix(jctl["Q_prime"], "controller.Q_prime");
      require_shape(cfg.controller.Q_prime, n, n, "controller.Q_prime");
    }
    if (jctl.contains("R_prime")) {
      cfg.controller.R_prime = parse_matrix(jctl["R_prime"], "controller.R_prime");
      require_shape(cfg.controller.R_prime, m, m, "controller.R_prime");
    }
  }

  const json& jd = field(j, "detector");
  if (jd.contains("tau")) cfg.tau = jd["tau"].get<double>();
  if (jd.contains("alpha")) cfg.alpha = jd["alpha"].get<double>();
  if (!cfg.tau && !cfg.alpha)
    throw MissingField("detector must provide 'alpha' or 'tau'");

  return cfg;
}

std::string serialize_scenario(const ScenarioConfig& cfg) {
  json j;
  j["model"] = {{"A", matrix_to_json(cfg.model.A)},
                {"B", matrix_to_json(cfg.model.B)},
                {"C", matrix_to_json(cfg.model.C)},
                {"Sigma_w", matrix_to_json(cfg.model.Sigma_w)},
                {"Sigma_v", matrix_to_json(cfg.model.Sigma_v)},
                {"Sigma_x", matrix_to_json(cfg.model.Sigma_x)}};
  j["channel"] = {{"Gamma", matrix_to_json(cfg.channel.Gamma)},
                  {"Psi", matrix_to_json(cfg.channel.Psi)}};
  json q = json::array();
  for (const auto& Q : cfg.objective.Q_stage) q.push_back(matrix_to_json(Q));
  j["objective"] = {{"x_star", vector_to_json(cfg.objective.x_star)},
                    {"Q_stage", q}};
  j["controller"] = {{"Q_prime", matrix_to_json(cfg.controller.Q_prime)},
                     {"R_prime", matrix_to_json(cfg.controller.R_prime)}};
  j["detector"] = json::object();
  if (cfg.tau) j["detector"]["tau"] = *cfg.tau;
  if (cfg.alpha) j["detector"]["alpha"] = *cfg.alpha;
  json strat;
  switch (cfg.strategy.kind) {
    case StrategyKind::ZeroDelta: strat = {{"kind", "eq"}}; break;
    case StrategyKind::OptimalDelta: strat = {{"kind", "opt"}}; break;
    case StrategyKind::Windowed:
      strat = {{"kind", "win"}, {"W", cfg.strategy.W}};
      break;
  }
  j["sim"] = {{"warmup", cfg.warmup}, {"N", cfg.objective.N},
              {"seed", cfg.seed},     {"strategy", strat},
              {"delta", cfg.objective.delta}};
  return j.dump(2);
}

ValidationReport validate_scenario(const ScenarioConfig& cfg) {
  ValidationReport rep;
  const auto& md = cfg.model;
  const int n = md.n;

  int cr = controllability_rank(md.A, md.B);
  rep.checks.push_back({"controllability", cr == n, double(cr - n),
                        "rank of controllability matrix minus n"});
  int orr = staircase_rank(md.A, md.C);
  rep.checks.push_back({"observability", orr == n, double(orr - n),
                        "rank of observability matrix minus n"});
  rep.checks.push_back(pd_check("Sigma_w_pd", md.Sigma_w));
  rep.checks.push_back(pd_check("Sigma_v_pd", md.Sigma_v));
  rep.checks.push_back(pd_check("Sigma_x_pd", md.Sigma_x));

  MatrixXd stack(n + md.p, cfg.channel.s);
  stack.topRows(n) = cfg.channel.Gamma;
  stack.bottomRows(md.p) = cfg.channel.Psi;
  int sr = numerical_rank(stack);
  rep.checks.push_back({"channel_injective", sr == cfg.channel.s,
                        double(sr - cfg.channel.s),
                        "rank of [Gamma; Psi] minus s"});

  int qor = staircase_rank(md.A, cfg.controller.Q_prime);
  rep.checks.push_back({"lqg_weight_observable", qor == n, double(qor - n),
                        "rank of (A, Q') observability matrix minus n"});
  rep.checks.push_back(pd_check("R_prime_pd", cfg.controller.R_prime));
  {
    double mineig = min_eigenvalue(cfg.controller.Q_prime);
    rep.checks.push_back({"Q_prime_psd", mineig >= -1e-10, mineig, "min eigenvalue"});
  }

  bool q_ok = static_cast<int>(cfg.objective.Q_stage.size()) == cfg.objective.N + 1;
  double q_min = q_ok ? std::numeric_limits<double>::infinity() : -1.0;
  for (const auto& Q : cfg.objective.Q_stage) q_min = std::min(q_min, min_eigenvalue(Q));
  rep.checks.push_back({"stage_weights_pd", q_ok && q_min > 0.0, q_min,
                        "min eigenvalue over all Q_t"});

  bool win_ok = true;
  if (cfg.strategy.kind == StrategyKind::Windowed)
    win_ok = cfg.strategy.W >= 2 && cfg.strategy.W <= cfg.objective.N + 1;
  rep.checks.push_back({"window_bound", win_ok,
                        win_ok ? 0.0 : double(cfg.strategy.W),
                        "2 <= W <= N+1 when windowed"});

  bool det_ok = true;
  if (cfg.tau)
    det_ok = *cfg.tau > 0.0;
  else if (cfg.alpha)
    det_ok = *cfg.alpha > 0.0 && *cfg.alpha < 1.0;
  rep.checks.push_back({"detector_config", det_ok, 0.0, "tau > 0 or alpha in (0,1)"});

  rep.pass = true;
  for (const auto& c : rep.checks) rep.pass = rep.pass && c.pass;
  return rep;
}

}  // namespace cps
