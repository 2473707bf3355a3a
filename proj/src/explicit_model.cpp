#include "seqdec/explicit_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace seqdec {

ExplicitDistributionModel::ExplicitDistributionModel(Vocabulary target_vocab,
                                                     int max_target_len)
    : target_vocab_(std::move(target_vocab)), max_target_len_(max_target_len) {
  if (max_target_len_ < 1) throw ConfigError("max_target_len must be >= 1");
}

void ExplicitDistributionModel::set_distribution(const Sentence& source,
                                                 std::vector<Entry> entries) {
  if (entries.empty()) throw ConfigError("empty outcome list");
  double total = 0.0;
  std::set<Sentence> seen;
  for (const auto& [target, prob] : entries) {
    if (!(prob > 0.0)) throw ConfigError("outcome probabilities must be > 0");
    if (static_cast<int>(target.size()) > max_target_len_) {
      throw ConfigError("outcome longer than max_target_len");
    }
    for (TokenId t : target) {
      if (t <= Vocabulary::kEos || t >= target_vocab_.size()) {
        throw ConfigError("outcome contains an invalid token id");
      }
    }
    if (!seen.insert(target).second) {
      throw ConfigError("duplicate outcome in explicit distribution");
    }
    total += prob;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("outcome probabilities sum to " + std::to_string(total) +
                      ", expected 1");
  }
  table_[source] = std::move(entries);
}

const std::vector<ExplicitDistributionModel::Entry>&
ExplicitDistributionModel::entries(const Sentence& source) const {
  auto it = table_.find(source);
  if (it == table_.end()) {
    throw UnknownSourceError("unknown source for explicit model");
  }
  return it->second;
}

Eigen::ArrayXd ExplicitDistributionModel::next_distribution_impl(
    const Sentence& source, const Sentence& prefix) const {
  const auto& outcomes = entries(source);
  Eigen::ArrayXd mass = Eigen::ArrayXd::Zero(target_vocab_.size());
  double prefix_mass = 0.0;
  const size_t plen = prefix.size();
  for (const auto& [target, prob] : outcomes) {
    if (target.size() < plen) continue;
    if (!std::equal(prefix.begin(), prefix.end(), target.begin())) continue;
    prefix_mass += prob;
    if (target.size() == plen) {
      mass[Vocabulary::kEos] += prob;
    } else {
      mass[target[plen]] += prob;
    }
  }
  if (prefix_mass <= 0.0) {
    // Prefix outside the support; only reachable through a zero-probability
    // step, so terminating keeps the distribution well formed.
    mass[Vocabulary::kEos] = 1.0;
    return mass;
  }
  return mass / prefix_mass;
}

ExplicitDistributionModel ExplicitDistributionModel::from_strings(
    const std::vector<std::pair<std::string, double>>& entries,
    int max_target_len) {
  Vocabulary vocab;
  std::vector<std::vector<std::string>> token_lists;
  size_t longest = 1;
  for (const auto& [text, prob] : entries) {
    (void)prob;
    std::istringstream in(text);
    std::vector<std::string> toks;
    std::string tok;
    while (in >> tok) toks.push_back(tok);
    for (const auto& t : toks) vocab.add(t);
    longest = std::max(longest, toks.size());
    token_lists.push_back(std::move(toks));
  }
  if (max_target_len <= 0) max_target_len = static_cast<int>(longest);
  ExplicitDistributionModel model(vocab, max_target_len);
  std::vector<Entry> encoded;
  for (size_t i = 0; i < entries.size(); ++i) {
    encoded.emplace_back(model.target_vocab().encode(token_lists[i]),
                         entries[i].second);
  }
  model.set_distribution(Sentence{}, std::move(encoded));
  return model;
}

}  // namespace seqdec
