#pragma once

#include "seqdec/rng.hpp"

namespace seqdec {

// Shape-rate Gamma throughout; Exp(r) is Gamma(1, r).
struct GammaParams {
  double shape = 1.0;
  double rate = 1.0;

  double mean() const { return shape / rate; }
  double variance() const { return shape / (rate * rate); }
  // E[log X] = digamma(shape) - log(rate)
  double e_log() const;
  double log_pdf(double x) const;
  double entropy() const;
  double sample(Rng& rng) const { return rng.gamma(shape, rate); }
};

double digamma(double x);

double exponential_log_pdf(double x, double rate);

}  // namespace seqdec
