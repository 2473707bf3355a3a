#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "seqdec/model.hpp"

namespace seqdec {

struct ScoredSentence {
  Sentence sentence;
  double log_prob = 0.0;      // pure model log-probability
  double search_score = 0.0;  // log-prob after length penalty
  bool operator==(const ScoredSentence& other) const = default;
};

// A multiset of ancestral samples for one source, with exact per-sequence
// log-probabilities. Per-sample seeds are derived from (seed, source_index,
// replicate) so any single sample can be reproduced in isolation.
struct SampleSet {
  Sentence source;
  std::vector<ScoredSentence> samples;
  uint64_t seed = 0;
  uint32_t source_index = 0;
  std::map<Sentence, int> unique_index;

  int size() const { return static_cast<int>(samples.size()); }
  void rebuild_index();
};

// One unbiased draw from the model's generative process.
ScoredSentence ancestral_sample(const ConditionalSequenceModel& model,
                                const Sentence& source, uint64_t seed,
                                int max_len = -1);

SampleSet draw_sample_set(const ConditionalSequenceModel& model,
                          const Sentence& source, int n_samples, uint64_t seed,
                          uint32_t source_index = 0);

struct BeamConfig {
  int width = 5;
  double length_penalty = 0.0;  // GNMT exponent a; 0 disables the penalty
  int max_len = -1;             // negative: use the model's length cap
  int max_width = 1000;

  void validate() const;
};

// ((5+n)/6)^a, the conventional length penalty divisor.
double length_penalty_divisor(int length, double exponent);

// Beam search over partial hypotheses. Candidates ending in EOS compete for
// beam slots with partial hypotheses; completed candidates that rank within
// the beam are set aside and the best completed hypothesis by search_score
// (ties lexicographic) is returned.
ScoredSentence beam_search(const ConditionalSequenceModel& model,
                           const Sentence& source, const BeamConfig& config);

struct SearchStats {
  long nodes_visited = 0;
  long completions_seen = 0;
  // Smallest value of (node log-prob - incumbent log-prob) observed at any
  // node visit; non-negative iff no pruned region was ever entered.
  double min_visit_margin = std::numeric_limits<double>::infinity();
};

// Exact MAP decoding by depth-first branch-and-bound, using the bound that
// extending a prefix never increases log-probability. Returns the global
// argmax over all sequences up to the model's length cap; ties broken by
// lexicographic token-id order. Throws BudgetError with the best-so-far
// attached when the node budget is exhausted.
ScoredSentence exact_mode(const ConditionalSequenceModel& model,
                          const Sentence& source,
                          long node_budget = 10'000'000, int max_len = -1,
                          SearchStats* stats = nullptr);

}  // namespace seqdec
