#pragma once

#include <cstdint>
#include <map>

#include "seqdec/model.hpp"

namespace seqdec {

enum class SourceConditioning {
  // Contexts keyed by the exact source sentence. No sharing across sources,
  // so unseen sources fall back to the smoothing distribution.
  kFullSentence,
  // Contexts keyed by a hash of the source n-gram window aligned with the
  // current target position. Shares counts across sources, so unseen source
  // sentences decompose into seen windows.
  kNgramSignature,
};

struct TabularOptions {
  int order = 2;            // Markov order over the target prefix
  double smoothing = 0.01;  // add-lambda over content tokens plus EOS
  int max_target_len = 25;
  SourceConditioning conditioning = SourceConditioning::kFullSentence;
  int signature_order = 2;  // window width for kNgramSignature

  void validate() const;
};

// Count-based conditional model. Contexts are (source key, target history of
// length <= order); each context stores next-token counts. With smoothing 0
// the conditionals are the empirical relative frequencies; a context that was
// never observed degenerates to a point mass on EOS, which is unreachable
// along any positive-probability prefix.
class TabularConditionalModel : public ConditionalSequenceModel {
 public:
  struct ContextCounts {
    std::map<TokenId, int64_t> counts;
    int64_t total = 0;
  };
  using ContextTable = std::map<Sentence, ContextCounts>;

  TabularConditionalModel(Vocabulary source_vocab, Vocabulary target_vocab,
                          TabularOptions options);

  const Vocabulary& target_vocab() const override { return target_vocab_; }
  const Vocabulary& source_vocab() const { return source_vocab_; }
  int max_target_len() const override { return options_.max_target_len; }
  const TabularOptions& options() const { return options_; }

  // Accumulates counts for one training pair.
  void observe(const Sentence& source, const Sentence& target);

  // Serialization accessors.
  const std::map<Sentence, uint64_t>& source_ids() const { return source_ids_; }
  const std::map<uint64_t, ContextTable>& tables() const { return tables_; }
  void insert_table(uint64_t key, ContextTable table);
  void register_source(const Sentence& source, uint64_t key);

 protected:
  Eigen::ArrayXd next_distribution_impl(const Sentence& source,
                                        const Sentence& prefix) const override;

 private:
  // Key of the context at a given target position; sets *known to false only
  // for full-sentence conditioning on an unregistered source.
  uint64_t source_key(const Sentence& source, int position, bool* known) const;

  Vocabulary source_vocab_;
  Vocabulary target_vocab_;
  TabularOptions options_;
  std::map<Sentence, uint64_t> source_ids_;  // full-sentence mode only
  std::map<uint64_t, ContextTable> tables_;
  uint64_t next_source_id_ = 0;
};

// Count-based MLE fit: with smoothing 0 the resulting conditionals equal the
// empirical conditional relative frequencies.
TabularConditionalModel fit_tabular(const ParallelCorpus& corpus,
                                    const TabularOptions& options);

}  // namespace seqdec
