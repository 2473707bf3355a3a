#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

namespace seqdec {

// Exact collapsed Dirichlet-Multinomial (Polya) log-likelihood of a count
// vector, multinomial coefficient included. Concentration must be strictly
// positive everywhere.
double dirmult_log_marginal(const Eigen::ArrayXd& counts,
                            const Eigen::ArrayXd& concentration);

// Preprocessed count vector so repeated evaluations only touch the non-zero
// cells: zero-count cells contribute lgamma(a) - lgamma(a) = 0.
struct SparseCounts {
  std::vector<std::pair<int, int64_t>> nonzero;
  int64_t total = 0;
  double log_multinomial_coeff = 0.0;
};

SparseCounts sparsify_counts(const Eigen::ArrayXd& counts);

// Same marginal given the precomputed total concentration.
double dirmult_log_marginal(const SparseCounts& counts,
                            const Eigen::ArrayXd& concentration,
                            double concentration_total);

// Symmetric-concentration variant: every cell has concentration alpha.
double dirmult_log_marginal_symmetric(const SparseCounts& counts, double alpha,
                                      int n_cells);

}  // namespace seqdec
