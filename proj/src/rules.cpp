#include "seqdec/rules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace seqdec {

double exact_match_utility(const Sentence& reference, const Sentence& hypothesis) {
  return reference == hypothesis ? 1.0 : 0.0;
}

namespace {

std::map<TokenId, int> token_counts(const Sentence& s) {
  std::map<TokenId, int> counts;
  for (TokenId t : s) counts[t] += 1;
  return counts;
}

int multiset_overlap(const Sentence& y, const Sentence& h) {
  const auto cy = token_counts(y);
  const auto ch = token_counts(h);
  int m = 0;
  for (const auto& [t, c] : ch) {
    auto it = cy.find(t);
    if (it != cy.end()) m += std::min(c, it->second);
  }
  return m;
}

// Minimum chunk count over maximal one-to-one exact alignments. A chunk is a
// maximal run of matches adjacent in the hypothesis and adjacent, in order,
// in the reference. Exact backtracking; positions are tried run-first so the
// first descent is already greedy and prunes hard.
struct ChunkMinimiser {
  const Sentence& y;
  const Sentence& h;
  std::map<TokenId, int> quota;        // matches still required per token
  std::map<TokenId, int> h_remaining;  // hypothesis positions left per token
  std::map<TokenId, std::vector<int>> y_positions;
  std::vector<bool> y_used;
  int best = std::numeric_limits<int>::max();

  ChunkMinimiser(const Sentence& y_, const Sentence& h_) : y(y_), h(h_) {
    const auto cy = token_counts(y);
    const auto ch = token_counts(h);
    for (const auto& [t, c] : ch) {
      auto it = cy.find(t);
      if (it != cy.end()) {
        const int q = std::min(c, it->second);
        if (q > 0) quota[t] = q;
      }
      h_remaining[t] = c;
    }
    for (int j = 0; j < static_cast<int>(y.size()); ++j) {
      y_positions[y[j]].push_back(j);
    }
    y_used.assign(y.size(), false);
  }

  void try_match(size_t i, int j, int prev_y, int chunks, TokenId t) {
    const bool continues = prev_y >= 0 && j == prev_y + 1;
    y_used[j] = true;
    quota[t] -= 1;
    search(i + 1, j, chunks + (continues ? 0 : 1));
    quota[t] += 1;
    y_used[j] = false;
  }

  void search(size_t i, int prev_y, int chunks) {
    if (chunks >= best) return;
    if (i == h.size()) {
      best = chunks;
      return;
    }
    const TokenId t = h[i];
    auto qit = quota.find(t);
    const int q = qit == quota.end() ? 0 : qit->second;
    h_remaining[t] -= 1;
    if (q > 0) {
      const auto& positions = y_positions[t];
      const int run_j = prev_y + 1;
      const bool run_tried = prev_y >= 0 && run_j < static_cast<int>(y.size()) &&
                             y[run_j] == t && !y_used[run_j];
      if (run_tried) {
        try_match(i, run_j, prev_y, chunks, t);
      }
      for (int j : positions) {
        if (y_used[j] || (run_tried && j == run_j)) continue;
        try_match(i, j, prev_y, chunks, t);
      }
    }
    // Leaving this position unmatched is only allowed when enough later
    // positions of the same token remain to keep the alignment maximal.
    if (h_remaining[t] >= q) {
      search(i + 1, -1, chunks);
    }
    h_remaining[t] += 1;
  }
};

// Single left-to-right pass preferring run continuation; exact whenever no
// token repeats within either sentence.
int greedy_chunks(const Sentence& y, const Sentence& h) {
  const auto cy = token_counts(y);
  const auto ch = token_counts(h);
  std::map<TokenId, int> quota;
  for (const auto& [t, c] : ch) {
    auto it = cy.find(t);
    if (it != cy.end()) quota[t] = std::min(c, it->second);
  }
  std::map<TokenId, std::vector<int>> y_positions;
  for (int j = static_cast<int>(y.size()) - 1; j >= 0; --j) {
    y_positions[y[j]].push_back(j);  // descending, so back() is the smallest
  }
  std::vector<bool> y_used(y.size(), false);
  int chunks = 0;
  int prev_y = -1;
  for (size_t i = 0; i < h.size(); ++i) {
    const TokenId t = h[i];
    auto qit = quota.find(t);
    if (qit == quota.end() || qit->second == 0) {
      prev_y = -1;
      continue;
    }
    int j = -1;
    const int run_j = prev_y + 1;
    if (prev_y >= 0 && run_j < static_cast<int>(y.size()) && y[run_j] == t &&
        !y_used[run_j]) {
      j = run_j;
    } else {
      auto& stack = y_positions[t];
      while (!stack.empty() && y_used[stack.back()]) stack.pop_back();
      if (stack.empty()) {
        prev_y = -1;
        continue;
      }
      j = stack.back();
    }
    y_used[j] = true;
    qit->second -= 1;
    if (!(prev_y >= 0 && j == prev_y + 1)) chunks += 1;
    prev_y = j;
  }
  return chunks;
}

int min_chunks(const Sentence& y, const Sentence& h) {
  if (std::min(y.size(), h.size()) > 20) return greedy_chunks(y, h);
  ChunkMinimiser minimiser(y, h);
  minimiser.search(0, -1, 0);
  return minimiser.best;
}

}  // namespace

double meteor_lite(const Sentence& reference, const Sentence& hypothesis,
                   const MeteorParams& params) {
  if (reference.empty() && hypothesis.empty()) return 1.0;
  if (reference.empty() || hypothesis.empty()) return 0.0;
  const int m = multiset_overlap(reference, hypothesis);
  if (m == 0) return 0.0;
  const int chunks = min_chunks(reference, hypothesis);
  const double precision = static_cast<double>(m) / hypothesis.size();
  const double recall = static_cast<double>(m) / reference.size();
  const double w = params.recall_weight;
  const double fmean =
      (w + 1.0) * precision * recall / (recall + w * precision);
  const double penalty =
      params.gamma * std::pow(static_cast<double>(chunks) / m, params.beta);
  return fmean * (1.0 - penalty);
}

double unigram_f1(const Sentence& reference, const Sentence& hypothesis) {
  if (reference.empty() && hypothesis.empty()) return 1.0;
  if (reference.empty() || hypothesis.empty()) return 0.0;
  const int m = multiset_overlap(reference, hypothesis);
  if (m == 0) return 0.0;
  const double precision = static_cast<double>(m) / hypothesis.size();
  const double recall = static_cast<double>(m) / reference.size();
  return 2.0 * precision * recall / (precision + recall);
}

double token_precision(const Sentence& reference, const Sentence& hypothesis) {
  if (reference.empty() && hypothesis.empty()) return 1.0;
  if (hypothesis.empty()) return 0.0;
  const int m = multiset_overlap(reference, hypothesis);
  return static_cast<double>(m) / hypothesis.size();
}

Utility make_utility(const std::string& name, const MeteorParams& params) {
  if (name == "exact_match") {
    return Utility(name, exact_match_utility);
  }
  if (name == "meteor_lite") {
    return Utility(name, [params](const Sentence& y, const Sentence& h) {
      return meteor_lite(y, h, params);
    });
  }
  if (name == "unigram_f1") {
    return Utility(name, unigram_f1);
  }
  if (name == "token_precision") {
    return Utility(name, token_precision);
  }
  throw ConfigError("unknown utility '" + name + "'");
}

double estimate_expected_utility(const SampleSet& samples,
                                 const Sentence& hypothesis,
                                 const Utility& utility) {
  if (samples.samples.empty()) throw ConfigError("empty sample set");
  double total = 0.0;
  for (const auto& s : samples.samples) total += utility(s.sentence, hypothesis);
  return total / samples.size();
}

DecisionResult mbr_decode(const SampleSet& samples, const Utility& utility) {
  if (samples.samples.empty()) throw ConfigError("empty sample set");
  DecisionResult result;
  result.candidate_utilities.reserve(samples.unique_index.size());
  bool have_best = false;
  double best_eu = 0.0;
  for (const auto& [candidate, multiplicity] : samples.unique_index) {
    (void)multiplicity;
    const double eu = estimate_expected_utility(samples, candidate, utility);
    result.utility_evaluations += samples.size();
    result.candidate_utilities.emplace_back(candidate, eu);
    // Iteration is lexicographic, so strict improvement keeps the smallest.
    if (!have_best || eu > best_eu) {
      have_best = true;
      best_eu = eu;
      result.chosen = candidate;
    }
  }
  result.expected_utility = best_eu;
  return result;
}

DecisionResult exact_mbr(const ConditionalSequenceModel& model,
                         const Sentence& source, const Utility& utility,
                         long node_budget) {
  const auto support = enumerate_support(model, source, node_budget);
  DecisionResult result;
  result.candidate_utilities.reserve(support.size());
  for (const auto& candidate : support) {
    double eu = 0.0;
    for (const auto& outcome : support) {
      eu += outcome.probability * utility(outcome.sentence, candidate.sentence);
    }
    result.utility_evaluations += static_cast<long>(support.size());
    result.candidate_utilities.emplace_back(candidate.sentence, eu);
  }
  std::sort(result.candidate_utilities.begin(), result.candidate_utilities.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  bool have_best = false;
  double best_eu = 0.0;
  for (const auto& [candidate, eu] : result.candidate_utilities) {
    if (!have_best || eu > best_eu) {
      have_best = true;
      best_eu = eu;
      result.chosen = candidate;
    }
  }
  result.expected_utility = best_eu;
  return result;
}

ScoredSentence oracle_select(const SampleSet& samples, const Sentence& reference,
                             const Utility& utility) {
  if (samples.samples.empty()) throw ConfigError("empty sample set");
  const ScoredSentence* best = nullptr;
  double best_u = -1.0;
  for (const auto& sample : samples.samples) {
    const double u = utility(reference, sample.sentence);
    if (!best || u > best_u ||
        (u == best_u && sample.sentence < best->sentence)) {
      best = &sample;
      best_u = u;
    }
  }
  return *best;
}

}  // namespace seqdec
