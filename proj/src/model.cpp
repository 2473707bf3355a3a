#include "seqdec/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace seqdec {

Eigen::ArrayXd ConditionalSequenceModel::next_distribution(
    const Sentence& source, const Sentence& prefix) const {
  const int l_max = max_target_len();
  if (static_cast<int>(prefix.size()) > l_max) {
    throw ContractError("prefix length " + std::to_string(prefix.size()) +
                        " exceeds the length cap " + std::to_string(l_max));
  }
  if (static_cast<int>(prefix.size()) == l_max) {
    Eigen::ArrayXd forced = Eigen::ArrayXd::Zero(target_vocab().size());
    forced[Vocabulary::kEos] = 1.0;
    return forced;
  }
  return next_distribution_impl(source, prefix);
}

int effective_length_cap(const ConditionalSequenceModel& model,
                         int max_len_override) {
  if (max_len_override < 0) return model.max_target_len();
  return std::min(max_len_override, model.max_target_len());
}

Eigen::ArrayXd capped_next_distribution(const ConditionalSequenceModel& model,
                                        const Sentence& source,
                                        const Sentence& prefix, int cap) {
  if (static_cast<int>(prefix.size()) >= cap) {
    Eigen::ArrayXd forced = Eigen::ArrayXd::Zero(model.target_vocab().size());
    forced[Vocabulary::kEos] = 1.0;
    return forced;
  }
  return model.next_distribution(source, prefix);
}

double ConditionalSequenceModel::sequence_log_prob(const Sentence& source,
                                                   const Sentence& target) const {
  if (static_cast<int>(target.size()) > max_target_len()) {
    throw ContractError("target length exceeds the length cap");
  }
  double log_prob = 0.0;
  Sentence prefix;
  prefix.reserve(target.size());
  for (size_t j = 0; j <= target.size(); ++j) {
    const TokenId next = j < target.size() ? target[j] : Vocabulary::kEos;
    const Eigen::ArrayXd dist = next_distribution(source, prefix);
    const double p = dist[next];
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    log_prob += std::log(p);
    if (j < target.size()) prefix.push_back(next);
  }
  return log_prob;
}

}  // namespace seqdec
