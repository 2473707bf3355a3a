#pragma once

#include <Eigen/Core>

#include "seqdec/types.hpp"

namespace seqdec {

// A locally normalised conditional sequence model: given a source sentence
// and a target prefix it yields a Categorical distribution over the next
// token (index 0 = end of sequence). Implementations must be deterministic
// and immutable once built; the hard length cap makes every distribution
// contract to a point mass on EOS at prefix length max_target_len().
class ConditionalSequenceModel {
 public:
  virtual ~ConditionalSequenceModel() = default;

  virtual const Vocabulary& target_vocab() const = 0;
  virtual int max_target_len() const = 0;

  // Probability vector over the target vocabulary. Sums to 1 within 1e-9.
  Eigen::ArrayXd next_distribution(const Sentence& source,
                                   const Sentence& prefix) const;

  // Log-probability of the full target, terminating EOS step included.
  // -inf when any step has probability zero.
  virtual double sequence_log_prob(const Sentence& source,
                                   const Sentence& target) const;

 protected:
  virtual Eigen::ArrayXd next_distribution_impl(const Sentence& source,
                                                const Sentence& prefix) const = 0;
};

// Resolves an optional per-call length cap against the model's own cap.
// A negative override means "use the model's".
int effective_length_cap(const ConditionalSequenceModel& model,
                         int max_len_override);

// next_distribution with termination forced at `cap` instead of the model's
// length limit; mass beyond the cap is folded into EOS.
Eigen::ArrayXd capped_next_distribution(const ConditionalSequenceModel& model,
                                        const Sentence& source,
                                        const Sentence& prefix, int cap);

}  // namespace seqdec
