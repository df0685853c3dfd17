#pragma once

#include <cstdint>
#include <random>

#include "modgraph/matrix.hpp"

namespace modgraph {

/// Seeded generator backed by std::mt19937_64 (64-bit Mersenne Twister,
/// MT19937-64 reference parameters). Streams are reproducible per build of
/// this library; cross-implementation fixtures are stored as files instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  bool bernoulli(double p) { return std::bernoulli_distribution(p)(engine_); }
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  Matrix uniform_matrix(std::size_t rows, std::size_t cols, double lo, double hi);
  Matrix normal_matrix(std::size_t rows, std::size_t cols, double stddev = 1.0);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent child seed from (seed, stream) with splitmix64, so
/// sub-generators do not share a stream with their parent.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace modgraph
