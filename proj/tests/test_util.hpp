#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "seqdec/explicit_model.hpp"
#include "seqdec/rng.hpp"
#include "seqdec/types.hpp"

namespace seqdec::testutil {

inline std::vector<std::string> split_ws(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline Sentence sent(const Vocabulary& vocab, const std::string& text) {
  return vocab.encode(split_ws(text));
}

inline std::string text(const Vocabulary& vocab, const Sentence& sentence) {
  return join_tokens(vocab.decode(sentence));
}

// Uniform distribution over all length-L strings of a V-token alphabet;
// V^L outcomes without materialising them.
class UniformFixedLengthModel : public ConditionalSequenceModel {
 public:
  UniformFixedLengthModel(int n_tokens, int length) : length_(length) {
    for (int i = 0; i < n_tokens; ++i) vocab_.add("w" + std::to_string(i));
  }

  const Vocabulary& target_vocab() const override { return vocab_; }
  int max_target_len() const override { return length_; }

 protected:
  Eigen::ArrayXd next_distribution_impl(const Sentence&,
                                        const Sentence& prefix) const override {
    Eigen::ArrayXd dist = Eigen::ArrayXd::Zero(vocab_.size());
    if (static_cast<int>(prefix.size()) >= length_) {
      dist[Vocabulary::kEos] = 1.0;
    } else {
      for (int t = 1; t < vocab_.size(); ++t) {
        dist[t] = 1.0 / vocab_.content_size();
      }
    }
    return dist;
  }

 private:
  Vocabulary vocab_;
  int length_;
};

// Random explicit model over a small alphabet: distinct sentences with
// probabilities proportional to random positive integers.
inline ExplicitDistributionModel random_explicit_model(uint64_t seed,
                                                       int max_outcomes = 12,
                                                       int n_tokens = 4,
                                                       int max_len = 4) {
  Rng rng(seed);
  const int n_outcomes =
      2 + static_cast<int>(rng.uniform_below(max_outcomes - 1));
  std::vector<std::pair<std::string, double>> entries;
  std::vector<std::string> seen;
  std::vector<double> weights;
  for (int i = 0; i < n_outcomes * 4 && static_cast<int>(seen.size()) < n_outcomes;
       ++i) {
    const int len = static_cast<int>(rng.uniform_below(max_len + 1));
    std::string s;
    for (int j = 0; j < len; ++j) {
      if (j) s += ' ';
      s += "tok" + std::to_string(rng.uniform_below(n_tokens));
    }
    bool dup = false;
    for (const auto& prev : seen) dup = dup || prev == s;
    if (dup) continue;
    seen.push_back(s);
    weights.push_back(1.0 + static_cast<double>(rng.uniform_below(97)));
  }
  double total = 0.0;
  for (double w : weights) total += w;
  for (size_t i = 0; i < seen.size(); ++i) {
    entries.emplace_back(seen[i], weights[i] / total);
  }
  return ExplicitDistributionModel::from_strings(entries, max_len);
}

}  // namespace seqdec::testutil
