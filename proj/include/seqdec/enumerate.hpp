#pragma once

#include <vector>

#include "seqdec/model.hpp"

namespace seqdec {

struct SupportEntry {
  Sentence sentence;
  double probability;
  double log_prob;
};

// Exhaustively enumerates every positive-probability target sequence up to
// the model's length cap, sorted by descending probability with ties broken
// by lexicographic token-id order. Each next-token query costs one node
// against the budget; exceeding it raises BudgetError ("support too large").
std::vector<SupportEntry> enumerate_support(const ConditionalSequenceModel& model,
                                            const Sentence& source,
                                            long node_budget = 10'000'000,
                                            int max_len_override = -1);

}  // namespace seqdec
