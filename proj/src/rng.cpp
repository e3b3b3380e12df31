#include "cps/rng.hpp"

#include <cmath>

namespace cps {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}
}  // namespace

std::uint64_t CounterRng::next_u64() {
  return mix64(seed_ + (++counter_) * kGolden);
}

double CounterRng::next_uniform() {
  // 53-bit mantissa, shifted into the open interval.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * next_uniform() - 1.0;
    v = 2.0 * next_uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

Eigen::VectorXd CounterRng::gaussian_vector(int dim) {
  Eigen::VectorXd z(dim);
  for (int i = 0; i < dim; ++i) z(i) = next_gaussian();
  return z;
}

}  // namespace cps
