#include "seqdec/bayes/gamma.hpp"

#include <cmath>

#include "seqdec/errors.hpp"

namespace seqdec {

double digamma(double x) {
  if (!(x > 0.0)) throw ContractError("digamma requires x > 0");
  // Recurrence up to the asymptotic regime, then the standard expansion.
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0));
  return result;
}

double GammaParams::e_log() const { return digamma(shape) - std::log(rate); }

double GammaParams::log_pdf(double x) const {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) - std::lgamma(shape) +
         (shape - 1.0) * std::log(x) - rate * x;
}

double GammaParams::entropy() const {
  return shape - std::log(rate) + std::lgamma(shape) +
         (1.0 - shape) * digamma(shape);
}

double exponential_log_pdf(double x, double rate) {
  if (x < 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(rate) - rate * x;
}

}  // namespace seqdec
