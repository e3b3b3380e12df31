#pragma once

#include <Eigen/Dense>

namespace cps {

// Upper tail P(X > x) of a chi-squared distribution with p degrees of
// freedom, evaluated through the regularized incomplete gamma function
// (series for small arguments, Lentz continued fraction otherwise).
double chi2_tail(int p, double x);

// Threshold tau with chi2_tail(p, tau) = alpha, by bisection.
double threshold_for_alpha(int p, double alpha);

// Lemma-style worst-case detection probability for per-step bias budget
// delta: chi2_tail(p, (sqrt(tau) - sqrt(delta))^2). Requires delta < tau.
double detection_bound(int p, double tau, double delta);

struct DetectorConfig {
  double tau;
  double alpha;
  int p;

  static DetectorConfig from_tau(int p, double tau);
  static DetectorConfig from_alpha(int p, double alpha);
};

struct DetectorResult {
  double g;
  bool alarm;
};

// g = nu^T Sigma_nu_inv nu, alarm when g > tau.
DetectorResult detector_step(const Eigen::VectorXd& nu,
                             const Eigen::MatrixXd& sigma_nu_inv,
                             const DetectorConfig& cfg);

}  // namespace cps
