#pragma once

#include <map>
#include <string>
#include <vector>

#include "seqdec/bayes/dirmult.hpp"
#include "seqdec/bayes/svi.hpp"

namespace seqdec {

// Hierarchical Dirichlet-Multinomial lexical model. Training unigram counts
// get a symmetric Dir(alpha) prior and every first-token row of the bigram
// table gets a symmetric Dir(beta) prior with beta shared across rows;
// alpha, beta ~ Gamm(1, 1). Inference is collapsed: the Dirichlets are
// integrated out and SVI fits only the two scalars.
struct LexicalTrainPosterior {
  GammaParams q_alpha;
  GammaParams q_beta;
  Eigen::ArrayXd unigram_counts;   // length V
  Eigen::ArrayXXd bigram_counts;   // V x V, row-indexed by the first token
  // Expected posterior concentrations, normalised to sum to 1: length V for
  // unigrams, length V*V (row-major pairs) for bigrams.
  Eigen::ArrayXd mu_alpha;
  Eigen::ArrayXd mu_beta;
  SviTrace alpha_trace;
  SviTrace beta_trace;
};

LexicalTrainPosterior fit_lexical_train(const Eigen::ArrayXd& unigram_counts,
                                        const Eigen::ArrayXXd& bigram_counts,
                                        const SviOptions& svi = {});

// Posterior over per-group agreement scalars for one statistic: group counts
// are Dirichlet-Multinomial with concentration scale * mu, the scales draw
// from Gamm(1, eta) and eta ~ Gamm(1, 0.2) ties the groups together.
struct AgreementPosterior {
  GammaParams q_eta;
  std::map<std::string, GammaParams> q_scale;
  SviTrace trace;

  const GammaParams& scale(const std::string& group) const;
  double mean(const std::string& group) const;
  std::vector<double> scale_samples(const std::string& group, int n,
                                    uint64_t seed) const;
};

AgreementPosterior fit_agreement(
    const Eigen::ArrayXd& mu,
    const std::map<std::string, Eigen::ArrayXd>& group_counts,
    const SviOptions& svi = {});

struct LexicalTestPosterior {
  AgreementPosterior unigram;  // s_g
  AgreementPosterior bigram;   // m_g
  Eigen::ArrayXd mu_alpha;
  Eigen::ArrayXd mu_beta;
  std::map<std::string, Eigen::ArrayXd> unigram_counts;
  std::map<std::string, Eigen::ArrayXd> bigram_counts;  // flattened pairs
};

LexicalTestPosterior fit_lexical_test(
    const LexicalTrainPosterior& train,
    const std::map<std::string, Eigen::ArrayXd>& group_unigrams,
    const std::map<std::string, Eigen::ArrayXXd>& group_bigrams,
    const SviOptions& svi = {});

struct LexicalPredictiveReport {
  double mean_abs_error = 0.0;
  double rank_correlation = 0.0;
  bool degenerate = false;  // correlation undefined (e.g. one-token vocab)
  int replicates = 0;
};

LexicalPredictiveReport predictive_check_lexical(
    const LexicalTrainPosterior& posterior, const Eigen::ArrayXd& observed,
    int replicates = 2000, uint64_t seed = 99);

LexicalPredictiveReport predictive_check_lexical(
    const LexicalTestPosterior& posterior, const std::string& group,
    const Eigen::ArrayXd& observed, int replicates = 2000, uint64_t seed = 99);

// Spearman rank correlation with average ranks on ties.
double spearman_correlation(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b);

}  // namespace seqdec
