#include <doctest.h>

#include <cmath>

#include "cps/chi2.hpp"
#include "cps/errors.hpp"
#include "cps/linalg.hpp"
#include "cps/rng.hpp"
#include "test_support.hpp"

using namespace cps;
using cps::testing::random_matrix;
using cps::testing::random_spd;

TEST_CASE("pinv recovers inverse and Moore-Penrose identities") {
  CounterRng rng(11);
  MatrixXd M = random_spd(rng, 5);
  CHECK((pinv(M) * M - MatrixXd::Identity(5, 5)).norm() < 1e-9);

  // Rank-deficient: projector identities.
  MatrixXd R = random_matrix(rng, 6, 2) * random_matrix(rng, 2, 4);
  MatrixXd Rp = pinv(R);
  CHECK((R * Rp * R - R).norm() < 1e-10);
  CHECK((Rp * R * Rp - Rp).norm() < 1e-10);
  CHECK(numerical_rank(R) == 2);
}

TEST_CASE("psd_sqrt factors symmetric PSD matrices") {
  CounterRng rng(12);
  MatrixXd S = random_spd(rng, 6);
  MatrixXd E = psd_sqrt(S);
  CHECK((E.transpose() * E - S).norm() < 1e-10);
  MatrixXd Z = MatrixXd::Zero(3, 3);
  CHECK(psd_sqrt(Z).norm() == 0.0);
}

TEST_CASE("cholesky_lower rejects indefinite input") {
  MatrixXd S(2, 2);
  S << 1, 2, 2, 1;
  CHECK_THROWS_AS(cholesky_lower(S), DomainError);
}

TEST_CASE("counter rng is reproducible and order-stable") {
  CounterRng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  CounterRng c(42);
  double first = c.next_gaussian();
  CounterRng d(42);
  CHECK(first == d.next_gaussian());
  CounterRng e(43);
  CHECK(first != e.next_gaussian());
}

TEST_CASE("gaussian moments are sane") {
  CounterRng rng(7);
  const int K = 200000;
  double sum = 0, sq = 0;
  for (int i = 0; i < K; ++i) {
    double g = rng.next_gaussian();
    sum += g;
    sq += g * g;
  }
  CHECK(std::fabs(sum / K) < 0.01);
  CHECK(std::fabs(sq / K - 1.0) < 0.02);
}

TEST_CASE("chi-squared tail matches closed forms") {
  // p = 2: exp(-x/2); p = 1: erfc(sqrt(x/2)).
  CHECK(chi2_tail(2, 2.3) == doctest::Approx(0.31663676937905322).epsilon(1e-10));
  CHECK(chi2_tail(1, 2.3) == doctest::Approx(0.12937399883629824).epsilon(1e-10));
  for (double x : {0.1, 0.7, 1.9, 4.2, 11.0, 30.0}) {
    CHECK(chi2_tail(2, x) == doctest::Approx(std::exp(-x / 2)).epsilon(1e-8));
    CHECK(chi2_tail(1, x) == doctest::Approx(std::erfc(std::sqrt(x / 2))).epsilon(1e-8));
  }
  CHECK(chi2_tail(5, 3.7) == doctest::Approx(0.59336396178180773).epsilon(1e-12));
  CHECK(chi2_tail(4, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("threshold round-trips through the tail") {
  for (int p : {1, 2, 5, 10}) {
    for (double alpha : {0.2, 0.05, 0.01, 1e-4}) {
      double tau = threshold_for_alpha(p, alpha);
      CHECK(chi2_tail(p, tau) == doctest::Approx(alpha).epsilon(1e-9));
    }
  }
  CHECK(threshold_for_alpha(2, 0.05) ==
        doctest::Approx(5.991464547107982).epsilon(1e-12));
  CHECK(threshold_for_alpha(10, 0.05) ==
        doctest::Approx(18.307038053275147).epsilon(1e-12));
}

TEST_CASE("worst-case detection bound") {
  double tau = 5.991464547107982;
  CHECK(detection_bound(2, tau, 1.0) ==
        doctest::Approx(0.35064342927541121).epsilon(1e-10));
  CHECK(detection_bound(2, tau, 0.0) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK_THROWS_AS(detection_bound(2, 1.0, 2.0), DomainError);
}

TEST_CASE("detector step thresholds the weighted norm") {
  DetectorConfig cfg = DetectorConfig::from_tau(2, 4.0);
  MatrixXd W = MatrixXd::Identity(2, 2);
  Eigen::VectorXd nu(2);
  nu << 1.0, 1.0;
  auto r = detector_step(nu, W, cfg);
  CHECK(r.g == doctest::Approx(2.0));
  CHECK_FALSE(r.alarm);
  nu << 2.0, 1.5;
  CHECK(detector_step(nu, W, cfg).alarm);
}
