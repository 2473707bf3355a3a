#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "seqdec/model.hpp"

namespace seqdec {

// A finite, fully spelled out conditional distribution over target sentences
// per source. Induced next-token conditionals are exactly consistent with
// the listed string probabilities, which makes this the brute-force oracle
// for everything the search and sampling code claims.
class ExplicitDistributionModel : public ConditionalSequenceModel {
 public:
  using Entry = std::pair<Sentence, double>;

  ExplicitDistributionModel(Vocabulary target_vocab, int max_target_len);

  // Registers the outcome list for one source. Targets must be distinct,
  // probabilities positive and summing to 1 within 1e-9.
  void set_distribution(const Sentence& source, std::vector<Entry> entries);

  const std::vector<Entry>& entries(const Sentence& source) const;
  const std::map<Sentence, std::vector<Entry>>& sources() const {
    return table_;
  }

  const Vocabulary& target_vocab() const override { return target_vocab_; }
  int max_target_len() const override { return max_target_len_; }

  // Convenience constructor for a single anonymous (empty) source with
  // whitespace-tokenised targets. Vocabulary ids follow first occurrence.
  static ExplicitDistributionModel from_strings(
      const std::vector<std::pair<std::string, double>>& entries,
      int max_target_len = 0);

 protected:
  Eigen::ArrayXd next_distribution_impl(const Sentence& source,
                                        const Sentence& prefix) const override;

 private:
  Vocabulary target_vocab_;
  int max_target_len_;
  std::map<Sentence, std::vector<Entry>> table_;
};

}  // namespace seqdec
