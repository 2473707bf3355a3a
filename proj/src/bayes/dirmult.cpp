#include "seqdec/bayes/dirmult.hpp"

#include <cmath>

#include "seqdec/errors.hpp"

namespace seqdec {

SparseCounts sparsify_counts(const Eigen::ArrayXd& counts) {
  SparseCounts out;
  for (Eigen::Index v = 0; v < counts.size(); ++v) {
    const double c = counts[v];
    if (c < 0.0) throw ContractError("counts must be non-negative");
    const int64_t n = std::llround(c);
    if (std::abs(c - static_cast<double>(n)) > 1e-9) {
      throw ContractError("counts must be integral");
    }
    if (n > 0) out.nonzero.emplace_back(static_cast<int>(v), n);
    out.total += n;
  }
  out.log_multinomial_coeff = std::lgamma(static_cast<double>(out.total) + 1.0);
  for (const auto& [v, n] : out.nonzero) {
    out.log_multinomial_coeff -= std::lgamma(static_cast<double>(n) + 1.0);
  }
  return out;
}

double dirmult_log_marginal(const SparseCounts& counts,
                            const Eigen::ArrayXd& concentration,
                            double concentration_total) {
  if (!(concentration_total > 0.0)) {
    throw ContractError("concentration must be strictly positive");
  }
  double result = counts.log_multinomial_coeff +
                  std::lgamma(concentration_total) -
                  std::lgamma(concentration_total +
                              static_cast<double>(counts.total));
  for (const auto& [v, n] : counts.nonzero) {
    const double a = concentration[v];
    if (!(a > 0.0)) {
      throw ContractError("concentration must be strictly positive");
    }
    result += std::lgamma(a + static_cast<double>(n)) - std::lgamma(a);
  }
  return result;
}

double dirmult_log_marginal(const Eigen::ArrayXd& counts,
                            const Eigen::ArrayXd& concentration) {
  if (counts.size() != concentration.size()) {
    throw ContractError("counts and concentration must have equal length");
  }
  if (!(concentration > 0.0).all()) {
    throw ContractError("concentration must be strictly positive");
  }
  return dirmult_log_marginal(sparsify_counts(counts), concentration,
                              concentration.sum());
}

double dirmult_log_marginal_symmetric(const SparseCounts& counts, double alpha,
                                      int n_cells) {
  if (!(alpha > 0.0)) {
    throw ContractError("concentration must be strictly positive");
  }
  const double lg_alpha = std::lgamma(alpha);
  double result = counts.log_multinomial_coeff +
                  std::lgamma(alpha * n_cells) -
                  std::lgamma(alpha * n_cells +
                              static_cast<double>(counts.total));
  for (const auto& [v, n] : counts.nonzero) {
    (void)v;
    result += std::lgamma(alpha + static_cast<double>(n)) - lg_alpha;
  }
  return result;
}

}  // namespace seqdec
