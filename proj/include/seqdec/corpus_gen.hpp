#pragma once

#include <string>
#include <utility>
#include <vector>

#include "seqdec/types.hpp"

namespace seqdec {

struct LengthDistribution {
  std::string kind = "uniform";  // "uniform" or "poisson"
  int min_len = 1;
  int max_len = 8;
  double mean = 4.0;  // poisson only; draws are clamped to [min_len, max_len]

  void validate() const;
};

// Synthetic translation task: every source token has k_syn target synonyms
// drawn per occurrence, adjacent target tokens swap with probability p_swap,
// and Poisson(rho) function words are inserted at random positions. With all
// noise off the target is a deterministic relabeling of the source.
struct CorpusConfig {
  int source_vocab_size = 30;
  int target_vocab_size = 60;
  int n_pairs = 5000;
  int synonyms_per_source = 2;         // k_syn
  std::vector<double> synonym_probs;   // empty means uniform
  double p_swap = 0.1;
  double function_word_rate = 0.0;     // rho
  LengthDistribution source_length;
  uint64_t seed = 1;

  void validate() const;
  int function_word_count() const {
    return target_vocab_size - source_vocab_size * synonyms_per_source;
  }
};

ParallelCorpus generate_corpus(const CorpusConfig& config);

// Token-level view of the generated task, used by serialisation and tests.
std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>
generate_token_pairs(const CorpusConfig& config);

// Shared corpus constructor: vocabularies follow first occurrence, exactly
// as when reading a serialised corpus back.
ParallelCorpus corpus_from_token_pairs(
    const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>&
        pairs);

// Ground-truth reference distribution for one source under synonym noise
// only (requires p_swap == 0 and function_word_rate == 0): the 2^n-style
// product of per-occurrence synonym choices.
std::vector<std::pair<Sentence, double>> enumerate_reference_distribution(
    const CorpusConfig& config, const ParallelCorpus& corpus,
    const Sentence& source);

struct SplitResult {
  ParallelCorpus train;
  ParallelCorpus heldout;
  int duplicates_removed = 0;
  int overlap_dropped = 0;
};

// Removes exact-duplicate pairs (pairs sharing only one side stay), holds
// out the last n_heldout pairs, then drops every training pair whose source
// or target exactly matches a held-out source or target.
SplitResult split_heldout(const ParallelCorpus& corpus, int n_heldout);

}  // namespace seqdec
