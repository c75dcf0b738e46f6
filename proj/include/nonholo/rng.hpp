#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

namespace nonholo {

/// Small splittable RNG (splitmix64 core).  Deterministic across platforms,
/// cheap to seed, good enough for sampling test states.  Not crypto.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Independent child stream; advances this stream by one draw.
  Rng split() { return Rng(next_u64() ^ 0x6a09e667f3bcc909ULL); }

  /// Uniform in [0, 1).
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal (polar Box-Muller, one value per call).
  double normal() {
    for (;;) {
      const double u = uniform(-1.0, 1.0);
      const double v = uniform(-1.0, 1.0);
      const double r2 = u * u + v * v;
      if (r2 > 0.0 && r2 < 1.0) return u * std::sqrt(-2.0 * std::log(r2) / r2);
    }
  }

  Eigen::VectorXd normal_vector(int dim) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = normal();
    return v;
  }

  /// Uniform over the solid ball of given radius in R^dim.
  Eigen::VectorXd ball(int dim, double radius) {
    Eigen::VectorXd g = normal_vector(dim);
    const double norm = g.norm();
    if (norm == 0.0) return Eigen::VectorXd::Zero(dim);
    const double r = radius * std::pow(uniform(), 1.0 / double(dim));
    return (r / norm) * g;
  }

  /// Componentwise uniform in [center_i - radius, center_i + radius].
  Eigen::VectorXd box(const Eigen::VectorXd& center, double radius) {
    Eigen::VectorXd v(center.size());
    for (int i = 0; i < center.size(); ++i)
      v[i] = center[i] + uniform(-radius, radius);
    return v;
  }

 private:
  std::uint64_t state_;
};

}  // namespace nonholo
