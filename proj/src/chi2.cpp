#include "cps/chi2.hpp"

#include <cmath>
#include <limits>

#include "cps/errors.hpp"

namespace cps {

namespace {
constexpr double kTermTol = 1e-14;
constexpr int kMaxIter = 100000;

// Regularized lower incomplete gamma P(a, x) by series expansion.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < kMaxIter; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * kTermTol)
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw NoConvergence("gamma_p_series: series did not converge");
}

// Regularized upper incomplete gamma Q(a, x) by modified Lentz continued
// fraction.
double gamma_q_cf(double a, double x) {
  const double tiny = std::numeric_limits<double>::min() / kTermTol;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kTermTol)
      return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw NoConvergence("gamma_q_cf: continued fraction did not converge");
}

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw DomainError("gamma_q: invalid arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}
}  // namespace

double chi2_tail(int p, double x) {
  if (p < 1) throw DomainError("chi2_tail: dof must be >= 1");
  if (x < 0.0) throw DomainError("chi2_tail: argument must be nonnegative");
  return gamma_q(0.5 * p, 0.5 * x);
}

double threshold_for_alpha(int p, double alpha) {
  if (alpha <= 0.0 || alpha >= 1.0)
    throw DomainError("threshold_for_alpha: alpha must lie in (0,1)");
  double lo = 0.0, hi = 1.0;
  while (chi2_tail(p, hi) > alpha) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (chi2_tail(p, mid) > alpha)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double detection_bound(int p, double tau, double delta) {
  if (delta < 0.0 || delta >= tau)
    throw DomainError("detection_bound: requires 0 <= delta < tau");
  double r = std::sqrt(tau) - std::sqrt(delta);
  return chi2_tail(p, r * r);
}

DetectorConfig DetectorConfig::from_tau(int p, double tau) {
  if (tau <= 0.0) throw DomainError("DetectorConfig: tau must be positive");
  return {tau, chi2_tail(p, tau), p};
}

DetectorConfig DetectorConfig::from_alpha(int p, double alpha) {
  double tau = threshold_for_alpha(p, alpha);
  return {tau, chi2_tail(p, tau), p};
}

DetectorResult detector_step(const Eigen::VectorXd& nu,
                             const Eigen::MatrixXd& sigma_nu_inv,
                             const DetectorConfig& cfg) {
  if (nu.size() != cfg.p) throw DimensionMismatch("detector_step: bad innovation size");
  double g = nu.dot(sigma_nu_inv * nu);
  return {g, g > cfg.tau};
}

}  // namespace cps
