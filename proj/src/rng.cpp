#include "seqdec/rng.hpp"

#include <cmath>

#include "seqdec/errors.hpp"

namespace seqdec {

namespace {
inline uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

uint64_t mix64(uint64_t a) {
  uint64_t s = a;
  return splitmix64(s);
}

uint64_t stable_hash(const std::string& text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t derive_seed(uint64_t seed, uint64_t a, uint64_t b) {
  uint64_t s = seed;
  uint64_t h = splitmix64(s);
  s = h ^ (a * 0x9e3779b97f4a7c15ULL);
  h = splitmix64(s);
  s = h ^ (b * 0xd1b54a32d192ed03ULL);
  return splitmix64(s);
}

Rng::Rng(uint64_t seed) {
  uint64_t sm = seed;
  for (auto& s : s_) s = splitmix64(sm);
}

uint64_t Rng::next_u64() {
  const uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

uint64_t Rng::uniform_below(uint64_t n) {
  if (n == 0) throw ContractError("uniform_below(0)");
  // Rejection sampling to avoid modulo bias.
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u1, u2;
  do {
    u1 = uniform01();
  } while (u1 <= 0.0);
  u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_normal_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double Rng::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw ContractError("gamma requires positive shape and rate");
  }
  // Marsaglia-Tsang; the shape<1 case is boosted through shape+1.
  if (shape < 1.0) {
    const double u = uniform01();
    return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return d * v / rate;
    }
  }
}

int64_t Rng::poisson(double mean) {
  if (mean < 0.0) throw ContractError("poisson requires non-negative mean");
  if (mean == 0.0) return 0;
  // Additivity keeps the exact inversion step bounded for large means.
  int64_t total = 0;
  while (mean > 30.0) {
    const double half = mean / 2.0;
    total += poisson(half);
    mean -= half;
  }
  const double limit = std::exp(-mean);
  double prod = uniform01();
  int64_t count = 0;
  while (prod > limit) {
    ++count;
    prod *= uniform01();
  }
  return total + count;
}

int Rng::categorical(const Eigen::ArrayXd& weights) {
  const double total = weights.sum();
  if (!(total > 0.0)) throw ContractError("categorical with zero total weight");
  double u = uniform01() * total;
  const int n = static_cast<int>(weights.size());
  for (int i = 0; i < n; ++i) {
    u -= weights[i];
    if (u < 0.0) return i;
  }
  // Rounding spill: return the last positively weighted index.
  for (int i = n - 1; i >= 0; --i) {
    if (weights[i] > 0.0) return i;
  }
  return n - 1;
}

Eigen::ArrayXd Rng::dirichlet(const Eigen::ArrayXd& concentration) {
  Eigen::ArrayXd draws(concentration.size());
  for (Eigen::Index i = 0; i < concentration.size(); ++i) {
    draws[i] = gamma(concentration[i], 1.0);
  }
  const double total = draws.sum();
  if (total <= 0.0) {
    // All mass collapsed numerically; fall back to the argmax cell.
    Eigen::Index arg = 0;
    concentration.maxCoeff(&arg);
    draws.setZero();
    draws[arg] = 1.0;
    return draws;
  }
  return draws / total;
}

}  // namespace seqdec
