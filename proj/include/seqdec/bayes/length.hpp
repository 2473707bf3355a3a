#pragma once

#include <map>
#include <string>
#include <vector>

#include "seqdec/bayes/svi.hpp"

namespace seqdec {

// Hierarchical Gamma-Poisson length model. Every observation gets its own
// Poisson rate with a shared Gamma(alpha, beta) population prior;
// alpha ~ Exp(1), beta ~ Exp(10), both rates. The per-point rate factors are
// conjugate and updated in closed form; SVI handles only alpha and beta.
struct LengthFitOptions {
  SviOptions svi;
  // Fixes alpha and beta to the values below instead of inferring them;
  // the per-point factors then equal Gamma(alpha + y_i, beta + 1) exactly.
  bool clamp_population = false;
  double fixed_alpha = 1.0;
  double fixed_beta = 1.0;
};

struct LengthTrainPosterior {
  GammaParams q_alpha;
  GammaParams q_beta;
  bool population_clamped = false;
  double fixed_alpha = 1.0;
  double fixed_beta = 1.0;
  std::vector<int64_t> lengths;
  std::vector<GammaParams> q_lambda;  // aligned with `lengths`
  double expected_rate = 0.0;         // mu = E[alpha/beta | data]
  SviTrace trace;

  // Mean of the per-point posterior rates.
  double mean_posterior_rate() const;
};

LengthTrainPosterior fit_length_train(const std::vector<int64_t>& lengths,
                                      const LengthFitOptions& options = {});

// Test groups extend the training fit: s_g ~ Exp(eta) scales the expected
// training rate, t_g is frozen at 1/mu, and each point keeps an individual
// conjugate rate factor. eta is shared by all groups.
struct LengthTestPosterior {
  double mu = 0.0;
  double t_g = 0.0;
  GammaParams q_eta;
  std::map<std::string, GammaParams> q_scale;  // s_g
  std::map<std::string, std::vector<GammaParams>> q_lambda;
  std::map<std::string, std::vector<int64_t>> data;
  SviTrace trace;

  const GammaParams& scale(const std::string& group) const;
  // Posterior mean of the group rate, E[s_g] * mu.
  double mean_rate(const std::string& group) const;
  // Posterior density samples of s_g * mu for plotting.
  std::vector<double> rate_samples(const std::string& group, int n,
                                   uint64_t seed) const;
};

LengthTestPosterior fit_length_test(
    const LengthTrainPosterior& train,
    const std::map<std::string, std::vector<int64_t>>& groups,
    const SviOptions& svi = {});

struct MomentCheck {
  double observed = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool inside = false;
};

struct LengthPredictiveReport {
  std::vector<MomentCheck> moments;  // raw moments of order 1..4
  int replicates = 0;
  bool all_inside() const;
};

LengthPredictiveReport predictive_check_length(const LengthTrainPosterior& posterior,
                                               const std::vector<int64_t>& observed,
                                               int replicates = 2000,
                                               uint64_t seed = 99);

LengthPredictiveReport predictive_check_length(const LengthTestPosterior& posterior,
                                               const std::string& group,
                                               const std::vector<int64_t>& observed,
                                               int replicates = 2000,
                                               uint64_t seed = 99);

}  // namespace seqdec
