#include "seqdec/enumerate.hpp"

#include <algorithm>
#include <cmath>

namespace seqdec {

namespace {

struct EnumState {
  const ConditionalSequenceModel* model;
  const Sentence* source;
  int max_len;
  long budget;
  long nodes = 0;
  std::vector<SupportEntry> out;
  Sentence prefix;
};

void enumerate_rec(EnumState& st, double log_prob) {
  if (++st.nodes > st.budget) {
    throw BudgetError("support too large: enumeration exceeded " +
                      std::to_string(st.budget) + " nodes");
  }
  if (static_cast<int>(st.prefix.size()) == st.max_len) {
    // Forced termination: all remaining mass goes to EOS here.
    st.out.push_back({st.prefix, std::exp(log_prob), log_prob});
    return;
  }
  const Eigen::ArrayXd dist =
      capped_next_distribution(*st.model, *st.source, st.prefix, st.max_len);
  for (int t = 0; t < dist.size(); ++t) {
    const double p = dist[t];
    if (p <= 0.0) continue;
    const double child_lp = log_prob + std::log(p);
    if (t == Vocabulary::kEos) {
      st.out.push_back({st.prefix, std::exp(child_lp), child_lp});
    } else {
      st.prefix.push_back(static_cast<TokenId>(t));
      enumerate_rec(st, child_lp);
      st.prefix.pop_back();
    }
  }
}

}  // namespace

std::vector<SupportEntry> enumerate_support(const ConditionalSequenceModel& model,
                                            const Sentence& source,
                                            long node_budget,
                                            int max_len_override) {
  EnumState st;
  st.model = &model;
  st.source = &source;
  st.max_len = effective_length_cap(model, max_len_override);
  st.budget = node_budget;
  enumerate_rec(st, 0.0);
  std::stable_sort(st.out.begin(), st.out.end(),
                   [](const SupportEntry& a, const SupportEntry& b) {
                     if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
                     return a.sentence < b.sentence;
                   });
  return st.out;
}

}  // namespace seqdec
