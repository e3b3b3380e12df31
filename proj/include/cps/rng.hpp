#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace cps {

// Counter-based generator: the i-th raw draw is the SplitMix64 finalizer
// applied to seed + i * 0x9E3779B97F4A7C15 (the 64-bit golden-ratio
// increment). Streams with different seeds are independent for practical
// purposes, and a stream is fully determined by (seed, counter).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed), counter_(0) {}

  std::uint64_t next_u64();

  // Uniform in (0, 1), never exactly 0 or 1.
  double next_uniform();

  // Standard normal via the Marsaglia polar method. The second variate of
  // each accepted pair is cached, so draws come in a fixed order.
  double next_gaussian();

  // Vector of i.i.d. standard normals.
  Eigen::VectorXd gaussian_vector(int dim);

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cps
