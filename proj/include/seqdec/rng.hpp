#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

namespace seqdec {

// Stable 64-bit mixer used wherever seeds are derived from (seed, index,
// replicate) tuples. The mix must never change: serialized runs replay it.
uint64_t mix64(uint64_t a);
uint64_t derive_seed(uint64_t seed, uint64_t a, uint64_t b);
// FNV-1a; stable across platforms and standard libraries.
uint64_t stable_hash(const std::string& text);

// Self-contained xoshiro256** generator. All downstream distributions are
// implemented here rather than with <random> so that sampled streams are
// identical across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform01();
  // Uniform integer in [0, n).
  uint64_t uniform_below(uint64_t n);
  double normal();
  // Shape-rate parameterisation.
  double gamma(double shape, double rate);
  int64_t poisson(double mean);
  // Index draw from an unnormalised non-negative weight vector.
  int categorical(const Eigen::ArrayXd& weights);
  Eigen::ArrayXd dirichlet(const Eigen::ArrayXd& concentration);

 private:
  uint64_t s_[4];
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace seqdec
