#include "seqdec/bayes/lexical.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "seqdec/errors.hpp"

namespace seqdec {

namespace {

// Scalar symmetric concentration over a set of count rows sharing the prior.
GammaParams fit_symmetric_concentration(const std::vector<SparseCounts>& rows,
                                        int n_cells, const GammaParams& prior,
                                        const SviOptions& svi, SviTrace* trace) {
  auto log_lik = [&](double conc) {
    double total = 0.0;
    for (const auto& row : rows) {
      if (row.total == 0) continue;
      total += dirmult_log_marginal_symmetric(row, conc, n_cells);
    }
    return total;
  };
  SviModel model;
  model.blanket = [&](int, const Eigen::ArrayXd& z) {
    return prior.log_pdf(z[0]) + log_lik(z[0]);
  };
  model.log_joint = [&](const Eigen::ArrayXd& z) {
    return prior.log_pdf(z[0]) + log_lik(z[0]);
  };
  const auto fitted = run_svi(model, {{2.0, 2.0}}, svi, trace);
  return fitted[0];
}

}  // namespace

LexicalTrainPosterior fit_lexical_train(const Eigen::ArrayXd& unigram_counts,
                                        const Eigen::ArrayXXd& bigram_counts,
                                        const SviOptions& svi) {
  const int v = static_cast<int>(unigram_counts.size());
  if (v < 1) throw ConfigError("empty vocabulary");
  if (bigram_counts.rows() != v || bigram_counts.cols() != v) {
    throw ConfigError("bigram table must be V x V");
  }
  if (unigram_counts.sum() <= 0.0) throw ConfigError("no unigram observations");

  LexicalTrainPosterior posterior;
  posterior.unigram_counts = unigram_counts;
  posterior.bigram_counts = bigram_counts;

  const GammaParams prior{1.0, 1.0};
  std::vector<SparseCounts> unigram_rows = {sparsify_counts(unigram_counts)};
  posterior.q_alpha = fit_symmetric_concentration(unigram_rows, v, prior, svi,
                                                  &posterior.alpha_trace);

  std::vector<SparseCounts> bigram_rows;
  bigram_rows.reserve(v);
  for (int u = 0; u < v; ++u) {
    bigram_rows.push_back(
        sparsify_counts(bigram_counts.row(u).transpose()));
  }
  SviOptions beta_svi = svi;
  beta_svi.seed = mix64(svi.seed + 1);
  posterior.q_beta = fit_symmetric_concentration(bigram_rows, v, prior,
                                                 beta_svi, &posterior.beta_trace);

  // Expected posterior concentration, normalised over the whole vocabulary
  // (pair vocabulary for bigrams).
  const Eigen::ArrayXd u_conc =
      unigram_counts + posterior.q_alpha.mean();
  posterior.mu_alpha = u_conc / u_conc.sum();
  Eigen::ArrayXd b_flat(v * v);
  for (int r = 0; r < v; ++r) {
    for (int c = 0; c < v; ++c) b_flat[r * v + c] = bigram_counts(r, c);
  }
  const Eigen::ArrayXd b_conc = b_flat + posterior.q_beta.mean();
  posterior.mu_beta = b_conc / b_conc.sum();
  return posterior;
}

const GammaParams& AgreementPosterior::scale(const std::string& group) const {
  auto it = q_scale.find(group);
  if (it == q_scale.end()) throw ConfigError("unknown group '" + group + "'");
  return it->second;
}

double AgreementPosterior::mean(const std::string& group) const {
  return scale(group).mean();
}

std::vector<double> AgreementPosterior::scale_samples(const std::string& group,
                                                      int n,
                                                      uint64_t seed) const {
  const GammaParams& q = scale(group);
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(q.sample(rng));
  return out;
}

AgreementPosterior fit_agreement(
    const Eigen::ArrayXd& mu,
    const std::map<std::string, Eigen::ArrayXd>& group_counts,
    const SviOptions& svi) {
  if (group_counts.empty()) throw ConfigError("no test groups");
  if (!(mu > 0.0).all()) {
    throw InvariantError("concentration direction must be strictly positive");
  }

  std::vector<std::string> labels;
  std::vector<SparseCounts> counts;
  std::vector<GammaParams> init;
  for (const auto& [label, vec] : group_counts) {
    if (vec.size() != mu.size()) {
      throw ConfigError("group '" + label +
                        "' vocabulary is not a subset of the training vocabulary");
    }
    labels.push_back(label);
    counts.push_back(sparsify_counts(vec));
    const double n_tokens = std::max<double>(counts.back().total, 1.0);
    init.push_back({1.5, 1.5 / std::clamp(0.5 * n_tokens, 0.1, 1e6)});
  }
  const int n_groups = static_cast<int>(labels.size());

  GammaParams q_eta{1.0, 0.2};
  double e_log_eta = 0.0;
  double e_eta = 1.0;

  auto group_log_lik = [&](int g, double s) {
    double result = std::lgamma(s) -
                    std::lgamma(s + static_cast<double>(counts[g].total)) +
                    counts[g].log_multinomial_coeff;
    for (const auto& [cell, n] : counts[g].nonzero) {
      const double a = s * mu[cell];
      result += std::lgamma(a + static_cast<double>(n)) - std::lgamma(a);
    }
    return result;
  };

  SviModel model;
  model.refresh = [&](const std::vector<GammaParams>& q) {
    double scale_total = 0.0;
    for (const auto& factor : q) scale_total += factor.mean();
    // Conjugate update: Gamm(1, 0.2) prior with Exp(eta) scale likelihoods.
    q_eta = {1.0 + static_cast<double>(n_groups), 0.2 + scale_total};
    e_log_eta = q_eta.e_log();
    e_eta = q_eta.mean();
  };
  model.blanket = [&](int g, const Eigen::ArrayXd& z) {
    return e_log_eta - e_eta * z[g] + group_log_lik(g, z[g]);
  };
  model.log_joint = [&](const Eigen::ArrayXd& z) {
    double total = 0.0;
    for (int g = 0; g < n_groups; ++g) {
      total += e_log_eta - e_eta * z[g] + group_log_lik(g, z[g]);
    }
    return total;
  };
  model.elbo_rest = [&]() {
    return std::log(0.2) - 0.2 * e_eta + q_eta.entropy();
  };

  AgreementPosterior posterior;
  const auto fitted = run_svi(model, init, svi, &posterior.trace);
  posterior.q_eta = q_eta;
  for (int g = 0; g < n_groups; ++g) posterior.q_scale[labels[g]] = fitted[g];
  return posterior;
}

LexicalTestPosterior fit_lexical_test(
    const LexicalTrainPosterior& train,
    const std::map<std::string, Eigen::ArrayXd>& group_unigrams,
    const std::map<std::string, Eigen::ArrayXXd>& group_bigrams,
    const SviOptions& svi) {
  LexicalTestPosterior posterior;
  posterior.mu_alpha = train.mu_alpha;
  posterior.mu_beta = train.mu_beta;
  posterior.unigram_counts = group_unigrams;

  posterior.unigram = fit_agreement(train.mu_alpha, group_unigrams, svi);

  const int v = static_cast<int>(train.mu_alpha.size());
  std::map<std::string, Eigen::ArrayXd> flat_bigrams;
  for (const auto& [label, table] : group_bigrams) {
    if (table.rows() != v || table.cols() != v) {
      throw ConfigError("group '" + label +
                        "' vocabulary is not a subset of the training vocabulary");
    }
    Eigen::ArrayXd flat(v * v);
    for (int r = 0; r < v; ++r) {
      for (int c = 0; c < v; ++c) flat[r * v + c] = table(r, c);
    }
    flat_bigrams[label] = std::move(flat);
  }
  posterior.bigram_counts = flat_bigrams;
  if (!flat_bigrams.empty()) {
    SviOptions bigram_svi = svi;
    bigram_svi.seed = mix64(svi.seed + 2);
    posterior.bigram = fit_agreement(train.mu_beta, flat_bigrams, bigram_svi);
  }
  return posterior;
}

double spearman_correlation(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) {
  const Eigen::Index n = a.size();
  if (n != b.size()) throw ContractError("rank correlation length mismatch");
  if (n < 2) throw ContractError("rank correlation needs at least 2 values");

  auto ranks = [n](const Eigen::ArrayXd& values) {
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
      return values[x] < values[y];
    });
    Eigen::ArrayXd out(n);
    Eigen::Index i = 0;
    while (i < n) {
      Eigen::Index j = i;
      while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (Eigen::Index k = i; k <= j; ++k) out[order[k]] = avg;
      i = j + 1;
    }
    return out;
  };

  const Eigen::ArrayXd ra = ranks(a);
  const Eigen::ArrayXd rb = ranks(b);
  const Eigen::ArrayXd da = ra - ra.mean();
  const Eigen::ArrayXd db = rb - rb.mean();
  const double denom = std::sqrt((da * da).sum() * (db * db).sum());
  if (denom <= 0.0) return 0.0;
  return (da * db).sum() / denom;
}

namespace {

void multinomial_draw(Rng& rng, const Eigen::ArrayXd& probs, int64_t n,
                      Eigen::ArrayXd& out) {
  const Eigen::Index v = probs.size();
  std::vector<double> cdf(static_cast<size_t>(v));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v; ++i) {
    acc += probs[i];
    cdf[static_cast<size_t>(i)] = acc;
  }
  out.setZero(v);
  for (int64_t k = 0; k < n; ++k) {
    const double u = rng.uniform01() * acc;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const Eigen::Index idx =
        std::min<Eigen::Index>(it - cdf.begin(), v - 1);
    out[idx] += 1.0;
  }
}

LexicalPredictiveReport predictive_check_counts(
    const std::function<double(Rng&)>& draw_scale,
    const Eigen::ArrayXd& direction, const Eigen::ArrayXd& fitted_counts,
    const Eigen::ArrayXd& observed, int replicates, uint64_t seed) {
  if (observed.size() != fitted_counts.size()) {
    throw ConfigError("observed counts do not match the fitted vocabulary");
  }
  if (replicates < 10) throw ConfigError("need at least 10 replicates");
  const int64_t n_obs = std::llround(observed.sum());
  Rng rng(seed);
  Eigen::ArrayXd mean_pred = Eigen::ArrayXd::Zero(observed.size());
  Eigen::ArrayXd replica(observed.size());
  for (int r = 0; r < replicates; ++r) {
    const double scale = draw_scale(rng);
    const Eigen::ArrayXd conc = scale * direction + fitted_counts;
    const Eigen::ArrayXd theta = rng.dirichlet(conc);
    multinomial_draw(rng, theta, n_obs, replica);
    mean_pred += replica;
  }
  mean_pred /= static_cast<double>(replicates);

  LexicalPredictiveReport report;
  report.replicates = replicates;
  report.mean_abs_error = (mean_pred - observed).abs().mean();
  if (observed.size() < 2) {
    report.degenerate = true;
  } else {
    report.rank_correlation = spearman_correlation(mean_pred, observed);
  }
  return report;
}

}  // namespace

LexicalPredictiveReport predictive_check_lexical(
    const LexicalTrainPosterior& posterior, const Eigen::ArrayXd& observed,
    int replicates, uint64_t seed) {
  const Eigen::ArrayXd direction =
      Eigen::ArrayXd::Ones(posterior.unigram_counts.size());
  return predictive_check_counts(
      [&](Rng& rng) { return posterior.q_alpha.sample(rng); }, direction,
      posterior.unigram_counts, observed, replicates, seed);
}

LexicalPredictiveReport predictive_check_lexical(
    const LexicalTestPosterior& posterior, const std::string& group,
    const Eigen::ArrayXd& observed, int replicates, uint64_t seed) {
  const GammaParams& q_s = posterior.unigram.scale(group);
  auto it = posterior.unigram_counts.find(group);
  if (it == posterior.unigram_counts.end()) {
    throw ConfigError("unknown group '" + group + "'");
  }
  return predictive_check_counts(
      [&](Rng& rng) { return q_s.sample(rng); }, posterior.mu_alpha,
      it->second, observed, replicates, seed);
}

}  // namespace seqdec
