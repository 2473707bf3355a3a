#include "seqdec/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "seqdec/rng.hpp"

namespace seqdec {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void SampleSet::rebuild_index() {
  unique_index.clear();
  for (const auto& s : samples) unique_index[s.sentence] += 1;
}

ScoredSentence ancestral_sample(const ConditionalSequenceModel& model,
                                const Sentence& source, uint64_t seed,
                                int max_len) {
  const int cap = effective_length_cap(model, max_len);
  Rng rng(seed);
  ScoredSentence out;
  for (;;) {
    const Eigen::ArrayXd dist =
        capped_next_distribution(model, source, out.sentence, cap);
    const int token = rng.categorical(dist);
    out.log_prob += std::log(dist[token]);
    if (token == Vocabulary::kEos) break;
    out.sentence.push_back(static_cast<TokenId>(token));
  }
  out.search_score = out.log_prob;
  return out;
}

SampleSet draw_sample_set(const ConditionalSequenceModel& model,
                          const Sentence& source, int n_samples, uint64_t seed,
                          uint32_t source_index) {
  if (n_samples < 1) throw ConfigError("sample size must be >= 1");
  SampleSet set;
  set.source = source;
  set.seed = seed;
  set.source_index = source_index;
  set.samples.reserve(static_cast<size_t>(n_samples));
  for (int r = 0; r < n_samples; ++r) {
    const uint64_t sample_seed =
        derive_seed(seed, source_index, static_cast<uint64_t>(r));
    set.samples.push_back(ancestral_sample(model, source, sample_seed));
  }
  set.rebuild_index();
  return set;
}

void BeamConfig::validate() const {
  if (width < 1) throw ConfigError("beam width must be >= 1");
  if (width > max_width) {
    throw ConfigError("beam width " + std::to_string(width) +
                      " exceeds the configured maximum " +
                      std::to_string(max_width));
  }
  if (length_penalty < 0.0) throw ConfigError("length penalty must be >= 0");
}

double length_penalty_divisor(int length, double exponent) {
  if (exponent == 0.0) return 1.0;
  return std::pow((5.0 + length) / 6.0, exponent);
}

namespace {

struct BeamHyp {
  Sentence tokens;
  double log_prob;
  double score;
  bool complete;
};

bool beam_better(const BeamHyp& a, const BeamHyp& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.tokens != b.tokens) return a.tokens < b.tokens;
  return a.complete && !b.complete;
}

}  // namespace

ScoredSentence beam_search(const ConditionalSequenceModel& model,
                           const Sentence& source, const BeamConfig& config) {
  config.validate();
  const double a = config.length_penalty;
  const int cap = effective_length_cap(model, config.max_len);

  std::vector<BeamHyp> live;
  live.push_back({Sentence{}, 0.0, 0.0, false});
  std::vector<BeamHyp> completed;

  while (!live.empty()) {
    std::vector<BeamHyp> pool;
    pool.reserve(live.size() * static_cast<size_t>(model.target_vocab().size()));
    for (const auto& hyp : live) {
      const Eigen::ArrayXd dist =
          capped_next_distribution(model, source, hyp.tokens, cap);
      for (int t = 0; t < dist.size(); ++t) {
        const double p = dist[t];
        if (p <= 0.0) continue;
        const double lp = hyp.log_prob + std::log(p);
        if (t == Vocabulary::kEos) {
          const int len = static_cast<int>(hyp.tokens.size());
          pool.push_back(
              {hyp.tokens, lp, lp / length_penalty_divisor(len, a), true});
        } else {
          Sentence ext = hyp.tokens;
          ext.push_back(static_cast<TokenId>(t));
          const int len = static_cast<int>(ext.size());
          const double score = lp / length_penalty_divisor(len, a);
          pool.push_back({std::move(ext), lp, score, false});
        }
      }
    }
    const size_t keep = std::min<size_t>(pool.size(),
                                         static_cast<size_t>(config.width));
    std::partial_sort(pool.begin(), pool.begin() + keep, pool.end(),
                      beam_better);
    pool.resize(keep);

    live.clear();
    for (auto& hyp : pool) {
      if (hyp.complete) {
        completed.push_back(std::move(hyp));
      } else {
        live.push_back(std::move(hyp));
      }
    }

    // With the penalty off, scores only decrease along a path, so once the
    // best completed hypothesis strictly beats every live one it is final.
    if (a == 0.0 && !completed.empty() && !live.empty()) {
      double best_completed = kNegInf;
      for (const auto& h : completed) best_completed = std::max(best_completed, h.score);
      double best_live = kNegInf;
      for (const auto& h : live) best_live = std::max(best_live, h.score);
      if (best_completed > best_live) break;
    }
  }

  if (completed.empty()) {
    throw InvariantError("beam search produced no completed hypothesis");
  }
  const BeamHyp* best = &completed.front();
  for (const auto& h : completed) {
    if (h.score > best->score ||
        (h.score == best->score && h.tokens < best->tokens)) {
      best = &h;
    }
  }
  return {best->tokens, best->log_prob, best->score};
}

namespace {

struct ExactSearch {
  const ConditionalSequenceModel* model;
  const Sentence* source;
  long budget;
  int cap;
  SearchStats stats;
  Sentence incumbent;
  double incumbent_lp = kNegInf;
  bool has_incumbent = false;
  Sentence prefix;

  void note_completion(double lp) {
    stats.completions_seen += 1;
    if (!has_incumbent || lp > incumbent_lp ||
        (lp == incumbent_lp && prefix < incumbent)) {
      incumbent = prefix;
      incumbent_lp = lp;
      has_incumbent = true;
    }
  }

  void visit(double log_prob) {
    if (has_incumbent) {
      stats.min_visit_margin =
          std::min(stats.min_visit_margin, log_prob - incumbent_lp);
    }
    if (++stats.nodes_visited > budget) {
      if (has_incumbent) {
        throw BudgetError("exact mode search exceeded " +
                              std::to_string(budget) + " nodes",
                          incumbent, incumbent_lp);
      }
      throw BudgetError("exact mode search exceeded " + std::to_string(budget) +
                        " nodes");
    }
    const Eigen::ArrayXd dist =
        capped_next_distribution(*model, *source, prefix, cap);
    for (int t = 0; t < dist.size(); ++t) {
      const double p = dist[t];
      if (p <= 0.0) continue;
      const double child_lp = log_prob + std::log(p);
      if (t == Vocabulary::kEos) {
        note_completion(child_lp);
      } else if (child_lp >= incumbent_lp || !has_incumbent) {
        // Extending never raises log-probability, so any strictly worse
        // prefix cannot contain the mode. Equal prefixes are kept: a
        // lexicographically smaller tie may complete below them.
        prefix.push_back(static_cast<TokenId>(t));
        visit(child_lp);
        prefix.pop_back();
      }
    }
  }
};

}  // namespace

ScoredSentence exact_mode(const ConditionalSequenceModel& model,
                          const Sentence& source, long node_budget,
                          int max_len, SearchStats* stats) {
  ExactSearch search;
  search.model = &model;
  search.source = &source;
  search.budget = node_budget;
  search.cap = effective_length_cap(model, max_len);

  // Greedy rollout to seed the incumbent; replays the same arithmetic the
  // depth-first search uses, so log-probabilities compare exactly.
  {
    Sentence prefix;
    double lp = 0.0;
    for (;;) {
      if (++search.stats.nodes_visited > node_budget) {
        throw BudgetError("exact mode search exceeded " +
                          std::to_string(node_budget) + " nodes");
      }
      const Eigen::ArrayXd dist =
          capped_next_distribution(model, source, prefix, search.cap);
      Eigen::Index argmax = 0;
      dist.maxCoeff(&argmax);
      lp += std::log(dist[argmax]);
      if (argmax == Vocabulary::kEos) break;
      prefix.push_back(static_cast<TokenId>(argmax));
    }
    search.incumbent = prefix;
    search.incumbent_lp = lp;
    search.has_incumbent = true;
  }

  search.visit(0.0);

  if (stats) *stats = search.stats;
  return {search.incumbent, search.incumbent_lp, search.incumbent_lp};
}

}  // namespace seqdec
