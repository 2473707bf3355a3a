#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "seqdec/decode.hpp"
#include "seqdec/enumerate.hpp"

namespace seqdec {

// A named, deterministic sentence-level scoring function u(reference,
// hypothesis) in [0, 1]. Nothing downstream assumes symmetry.
class Utility {
 public:
  using Fn = std::function<double(const Sentence&, const Sentence&)>;

  Utility(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}

  double operator()(const Sentence& reference, const Sentence& hypothesis) const {
    return fn_(reference, hypothesis);
  }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  Fn fn_;
};

struct MeteorParams {
  double recall_weight = 9.0;  // Fmean = (w+1)PR / (R + wP)
  double gamma = 0.5;          // fragmentation penalty weight
  double beta = 3.0;           // fragmentation penalty exponent
};

// 1 iff the token sequences are identical.
double exact_match_utility(const Sentence& reference, const Sentence& hypothesis);

// Exact-unigram-match METEOR: matches are a maximal one-to-one alignment
// minimising the number of chunks; score = Fmean * (1 - gamma*(ch/m)^beta).
// Zero when only one side is empty, one when both are.
double meteor_lite(const Sentence& reference, const Sentence& hypothesis,
                   const MeteorParams& params = {});

// Harmonic mean of unigram precision and recall under multiset overlap.
double unigram_f1(const Sentence& reference, const Sentence& hypothesis);

// Precision-only overlap; intentionally asymmetric.
double token_precision(const Sentence& reference, const Sentence& hypothesis);

// Lookup by name: exact_match, meteor_lite, unigram_f1, token_precision.
Utility make_utility(const std::string& name, const MeteorParams& params = {});

struct DecisionResult {
  Sentence chosen;
  double expected_utility = 0.0;
  // (candidate, expected utility), in lexicographic candidate order.
  std::vector<std::pair<Sentence, double>> candidate_utilities;
  long utility_evaluations = 0;
};

// Monte-Carlo estimate of expected utility for one hypothesis: the mean of
// u(sample, hypothesis) over all samples, multiplicity included.
double estimate_expected_utility(const SampleSet& samples,
                                 const Sentence& hypothesis,
                                 const Utility& utility);

// Sampling-based MBR: candidates are the unique sampled sentences, expected
// utility is the Monte-Carlo estimate above, cost is exactly |unique| * S
// utility evaluations. Ties broken lexicographically.
DecisionResult mbr_decode(const SampleSet& samples, const Utility& utility);

// Brute-force MBR over the full enumerated support with exact probabilities;
// the S -> infinity limit of mbr_decode.
DecisionResult exact_mbr(const ConditionalSequenceModel& model,
                         const Sentence& source, const Utility& utility,
                         long node_budget = 10'000'000);

// Best sample according to u(reference, sample); an upper bound, not a rule.
ScoredSentence oracle_select(const SampleSet& samples, const Sentence& reference,
                             const Utility& utility);

}  // namespace seqdec
