#include "seqdec/bayes/length.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

#include "seqdec/errors.hpp"

namespace seqdec {

namespace {

std::map<int64_t, int64_t> count_values(const std::vector<int64_t>& lengths) {
  std::map<int64_t, int64_t> counts;
  for (int64_t y : lengths) {
    if (y < 0) throw ConfigError("lengths must be non-negative counts");
    counts[y] += 1;
  }
  return counts;
}

// Conjugate rate-factor statistics for one dataset under a Gamma(shape_base
// + y, rate) factor per point, grouped by distinct value.
struct LambdaStats {
  double t_log = 0.0;    // sum of E[log lambda_i]
  double t_mean = 0.0;   // sum of E[lambda_i]
  double elbo_rest = 0.0;  // Poisson terms plus factor entropies
};

LambdaStats lambda_stats(const std::map<int64_t, int64_t>& counts,
                         double shape_base, double rate) {
  LambdaStats stats;
  for (const auto& [y, c] : counts) {
    const GammaParams q{shape_base + static_cast<double>(y), rate};
    const double e_log = q.e_log();
    const double e_mean = q.mean();
    const double n = static_cast<double>(c);
    stats.t_log += n * e_log;
    stats.t_mean += n * e_mean;
    stats.elbo_rest += n * (static_cast<double>(y) * e_log - e_mean -
                            std::lgamma(static_cast<double>(y) + 1.0) +
                            q.entropy());
  }
  return stats;
}

double quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * (static_cast<double>(values.size()) - 1.0);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

std::array<double, 4> raw_moments(const std::vector<int64_t>& values) {
  std::array<double, 4> moments{0.0, 0.0, 0.0, 0.0};
  for (int64_t v : values) {
    const double x = static_cast<double>(v);
    double p = x;
    for (int k = 0; k < 4; ++k) {
      moments[k] += p;
      p *= x;
    }
  }
  for (auto& m : moments) m /= static_cast<double>(values.size());
  return moments;
}

LengthPredictiveReport check_moments(
    const std::vector<int64_t>& observed, int replicates, Rng& rng,
    const std::function<void(Rng&, std::vector<int64_t>&)>& simulate) {
  if (observed.empty()) throw ConfigError("no observations to check");
  if (replicates < 10) throw ConfigError("need at least 10 replicates");
  std::array<std::vector<double>, 4> rep_moments;
  for (auto& v : rep_moments) v.reserve(replicates);
  std::vector<int64_t> replica(observed.size());
  for (int r = 0; r < replicates; ++r) {
    simulate(rng, replica);
    const auto m = raw_moments(replica);
    for (int k = 0; k < 4; ++k) rep_moments[k].push_back(m[k]);
  }
  const auto obs = raw_moments(observed);
  LengthPredictiveReport report;
  report.replicates = replicates;
  for (int k = 0; k < 4; ++k) {
    MomentCheck check;
    check.observed = obs[k];
    check.lo = quantile(rep_moments[k], 0.05);
    check.hi = quantile(rep_moments[k], 0.95);
    check.inside = check.lo <= check.observed && check.observed <= check.hi;
    report.moments.push_back(check);
  }
  return report;
}

}  // namespace

bool LengthPredictiveReport::all_inside() const {
  for (const auto& m : moments) {
    if (!m.inside) return false;
  }
  return true;
}

double LengthTrainPosterior::mean_posterior_rate() const {
  if (q_lambda.empty()) return 0.0;
  double total = 0.0;
  for (const auto& q : q_lambda) total += q.mean();
  return total / static_cast<double>(q_lambda.size());
}

LengthTrainPosterior fit_length_train(const std::vector<int64_t>& lengths,
                                      const LengthFitOptions& options) {
  const auto counts = count_values(lengths);
  if (lengths.empty()) throw ConfigError("no length observations");
  if (!options.clamp_population && lengths.size() < 10) {
    throw ConfigError("need at least 10 observations to fit the population");
  }

  LengthTrainPosterior posterior;
  posterior.lengths = lengths;
  posterior.population_clamped = options.clamp_population;
  posterior.fixed_alpha = options.fixed_alpha;
  posterior.fixed_beta = options.fixed_beta;

  const double n = static_cast<double>(lengths.size());

  if (options.clamp_population) {
    if (!(options.fixed_alpha > 0.0) || !(options.fixed_beta > 0.0)) {
      throw ConfigError("clamped alpha and beta must be positive");
    }
    posterior.q_alpha = {options.fixed_alpha * 1e12, 1e12};
    posterior.q_beta = {options.fixed_beta * 1e12, 1e12};
    posterior.expected_rate = options.fixed_alpha / options.fixed_beta;
  } else {
    // Method-of-moments warm start for the population shape.
    double mean = 0.0;
    for (int64_t y : lengths) mean += static_cast<double>(y);
    mean /= n;
    double var = 0.0;
    for (int64_t y : lengths) {
      const double d = static_cast<double>(y) - mean;
      var += d * d;
    }
    var /= n;
    mean = std::max(mean, 0.05);
    double beta0 = var > mean * 1.05 ? mean / (var - mean) : 10.0;
    beta0 = std::clamp(beta0, 0.02, 50.0);
    const double alpha0 = std::clamp(mean * beta0, 0.05, 1e5);

    // Only alpha needs score gradients. Given alpha and the rate factors,
    // beta is Gamma-conjugate: q(beta) = Gamma(1 + n*E[alpha], 10 + sum E[lambda]).
    GammaParams q_beta{1.0 + n * alpha0, (10.0 + n * mean) / std::max(mean, 1e-6)};
    LambdaStats stats;
    double e_log_beta = 0.0;

    SviModel model;
    model.refresh = [&](const std::vector<GammaParams>& q) {
      const double a_bar = q[0].mean();
      stats = lambda_stats(counts, a_bar, q_beta.mean() + 1.0);
      q_beta = {1.0 + n * a_bar, 10.0 + stats.t_mean};
      e_log_beta = q_beta.e_log();
    };
    model.blanket = [&](int, const Eigen::ArrayXd& z) {
      const double alpha = z[0];
      return -alpha + n * (alpha * e_log_beta - std::lgamma(alpha)) +
             (alpha - 1.0) * stats.t_log;
    };
    model.log_joint = [&](const Eigen::ArrayXd& z) {
      const double alpha = z[0];
      return -alpha + n * (alpha * e_log_beta - std::lgamma(alpha)) +
             (alpha - 1.0) * stats.t_log;
    };
    model.elbo_rest = [&]() {
      // Terms free of the sampled alpha: the data and entropy terms of the
      // rate factors plus the conjugate beta factor.
      return stats.elbo_rest - q_beta.mean() * stats.t_mean +
             std::log(10.0) - 10.0 * q_beta.mean() + q_beta.entropy();
    };

    std::vector<GammaParams> init = {{25.0, 25.0 / alpha0}};
    const auto fitted = run_svi(model, init, options.svi, &posterior.trace);
    posterior.q_alpha = fitted[0];
    posterior.q_beta = q_beta;

    // mu = E[alpha] * E[1/beta]; the inverse moment is exact for shape > 1.
    const double e_inv_beta =
        posterior.q_beta.shape > 1.0
            ? posterior.q_beta.rate / (posterior.q_beta.shape - 1.0)
            : 1.0 / posterior.q_beta.mean();
    posterior.expected_rate = posterior.q_alpha.mean() * e_inv_beta;
  }

  const double a_final = options.clamp_population ? options.fixed_alpha
                                                  : posterior.q_alpha.mean();
  const double b_final = options.clamp_population ? options.fixed_beta
                                                  : posterior.q_beta.mean();
  posterior.q_lambda.reserve(lengths.size());
  for (int64_t y : lengths) {
    posterior.q_lambda.push_back(
        {a_final + static_cast<double>(y), b_final + 1.0});
  }
  return posterior;
}

const GammaParams& LengthTestPosterior::scale(const std::string& group) const {
  auto it = q_scale.find(group);
  if (it == q_scale.end()) throw ConfigError("unknown group '" + group + "'");
  return it->second;
}

double LengthTestPosterior::mean_rate(const std::string& group) const {
  return scale(group).mean() * mu;
}

std::vector<double> LengthTestPosterior::rate_samples(const std::string& group,
                                                      int n,
                                                      uint64_t seed) const {
  const GammaParams& q = scale(group);
  Rng rng(seed);
  std::vector<double> samples;
  samples.reserve(n);
  for (int i = 0; i < n; ++i) samples.push_back(q.sample(rng) * mu);
  return samples;
}

LengthTestPosterior fit_length_test(
    const LengthTrainPosterior& train,
    const std::map<std::string, std::vector<int64_t>>& groups,
    const SviOptions& svi) {
  if (groups.empty()) throw ConfigError("no test groups");
  if (!(train.expected_rate > 0.0)) {
    throw InvariantError("training posterior has a non-positive mean rate");
  }

  LengthTestPosterior posterior;
  posterior.mu = train.expected_rate;
  posterior.t_g = 1.0 / train.expected_rate;

  std::vector<std::string> labels;
  std::vector<std::map<int64_t, int64_t>> counts;
  std::vector<double> sizes;
  std::vector<GammaParams> init;
  for (const auto& [label, lengths] : groups) {
    if (lengths.empty()) {
      throw ConfigError("group '" + label + "' has no observations");
    }
    labels.push_back(label);
    counts.push_back(count_values(lengths));
    sizes.push_back(static_cast<double>(lengths.size()));
    posterior.data[label] = lengths;
    double mean = 0.0;
    for (int64_t y : lengths) mean += static_cast<double>(y);
    mean /= static_cast<double>(lengths.size());
    const double s0 = std::max(mean, 0.05) / train.expected_rate;
    init.push_back({2.0, 2.0 / s0});
  }
  const int n_groups = static_cast<int>(labels.size());
  const double t_g = posterior.t_g;

  GammaParams q_eta{1.0, 1.0};
  std::vector<LambdaStats> stats(n_groups);
  double e_log_eta = 0.0;
  double e_eta = 1.0;

  SviModel model;
  model.refresh = [&](const std::vector<GammaParams>& q) {
    double scale_total = 0.0;
    for (int g = 0; g < n_groups; ++g) {
      stats[g] = lambda_stats(counts[g], q[g].mean(), t_g + 1.0);
      scale_total += q[g].mean();
    }
    // Conjugate update: eta ~ Exp(1) prior with Exp(eta) likelihoods.
    q_eta = {1.0 + static_cast<double>(n_groups), 1.0 + scale_total};
    e_log_eta = q_eta.e_log();
    e_eta = q_eta.mean();
  };
  model.blanket = [&](int g, const Eigen::ArrayXd& z) {
    const double s = z[g];
    return e_log_eta - e_eta * s +
           sizes[g] * (s * std::log(t_g) - std::lgamma(s)) +
           (s - 1.0) * stats[g].t_log;
  };
  model.log_joint = [&](const Eigen::ArrayXd& z) {
    double total = 0.0;
    for (int g = 0; g < n_groups; ++g) {
      const double s = z[g];
      total += e_log_eta - e_eta * s +
               sizes[g] * (s * std::log(t_g) - std::lgamma(s)) +
               (s - 1.0) * stats[g].t_log;
    }
    return total;
  };
  model.elbo_rest = [&]() {
    double total = -e_eta + q_eta.entropy();  // Exp(1) prior on eta
    for (int g = 0; g < n_groups; ++g) {
      total += stats[g].elbo_rest - t_g * stats[g].t_mean;
    }
    return total;
  };

  const auto fitted = run_svi(model, init, svi, &posterior.trace);
  posterior.q_eta = q_eta;
  for (int g = 0; g < n_groups; ++g) {
    posterior.q_scale[labels[g]] = fitted[g];
    const auto& lengths = posterior.data[labels[g]];
    auto& lambdas = posterior.q_lambda[labels[g]];
    lambdas.reserve(lengths.size());
    for (int64_t y : lengths) {
      lambdas.push_back({fitted[g].mean() + static_cast<double>(y), t_g + 1.0});
    }
  }
  return posterior;
}

LengthPredictiveReport predictive_check_length(const LengthTrainPosterior& posterior,
                                               const std::vector<int64_t>& observed,
                                               int replicates, uint64_t seed) {
  Rng rng(seed);
  return check_moments(
      observed, replicates, rng,
      [&](Rng& r, std::vector<int64_t>& replica) {
        const double alpha = posterior.population_clamped
                                 ? posterior.fixed_alpha
                                 : posterior.q_alpha.sample(r);
        const double beta = posterior.population_clamped
                                ? posterior.fixed_beta
                                : posterior.q_beta.sample(r);
        for (auto& y : replica) y = r.poisson(r.gamma(alpha, beta));
      });
}

LengthPredictiveReport predictive_check_length(const LengthTestPosterior& posterior,
                                               const std::string& group,
                                               const std::vector<int64_t>& observed,
                                               int replicates, uint64_t seed) {
  const GammaParams& q_s = posterior.scale(group);
  Rng rng(seed);
  return check_moments(
      observed, replicates, rng,
      [&](Rng& r, std::vector<int64_t>& replica) {
        const double s = q_s.sample(r);
        for (auto& y : replica) y = r.poisson(r.gamma(s, posterior.t_g));
      });
}

}  // namespace seqdec
