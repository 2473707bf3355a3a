#include "seqdec/corpus_gen.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "seqdec/rng.hpp"

namespace seqdec {

void LengthDistribution::validate() const {
  if (kind != "uniform" && kind != "poisson") {
    throw ConfigError("unknown length distribution kind '" + kind + "'");
  }
  if (min_len < 1 || max_len < min_len) {
    throw ConfigError("length distribution needs 1 <= min_len <= max_len");
  }
  if (kind == "poisson" && !(mean > 0.0)) {
    throw ConfigError("poisson length distribution needs mean > 0");
  }
}

void CorpusConfig::validate() const {
  if (source_vocab_size < 1) throw ConfigError("source vocab size must be >= 1");
  if (n_pairs < 1) throw ConfigError("number of pairs must be >= 1");
  if (synonyms_per_source < 1) throw ConfigError("k_syn must be >= 1");
  if (!synonym_probs.empty()) {
    if (static_cast<int>(synonym_probs.size()) != synonyms_per_source) {
      throw ConfigError("synonym probability vector must have k_syn entries");
    }
    double total = 0.0;
    for (double p : synonym_probs) {
      if (p < 0.0 || p > 1.0) throw ConfigError("synonym probabilities must be in [0,1]");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw ConfigError("synonym probabilities must sum to 1");
    }
  }
  if (p_swap < 0.0 || p_swap > 1.0) throw ConfigError("p_swap must be in [0,1]");
  if (function_word_rate < 0.0) throw ConfigError("function word rate must be >= 0");
  if (function_word_count() < 0) {
    throw ConfigError("target vocab too small: need at least source vocab * k_syn tokens");
  }
  if (function_word_rate > 0.0 && function_word_count() < 1) {
    throw ConfigError("function word insertion needs spare target vocab tokens");
  }
  source_length.validate();
}

namespace {

std::string source_token(int i) { return "s" + std::to_string(i); }
std::string synonym_token(int i, int j) {
  return "t" + std::to_string(i) + "_" + std::to_string(j);
}
std::string function_token(int i) { return "f" + std::to_string(i); }

int draw_length(Rng& rng, const LengthDistribution& dist) {
  if (dist.kind == "uniform") {
    return dist.min_len +
           static_cast<int>(rng.uniform_below(
               static_cast<uint64_t>(dist.max_len - dist.min_len + 1)));
  }
  const int len = static_cast<int>(rng.poisson(dist.mean));
  return std::clamp(len, dist.min_len, dist.max_len);
}

}  // namespace

std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>
generate_token_pairs(const CorpusConfig& config) {
  config.validate();
  Rng rng(config.seed);
  Eigen::ArrayXd syn_probs;
  if (config.synonym_probs.empty()) {
    syn_probs = Eigen::ArrayXd::Constant(config.synonyms_per_source,
                                         1.0 / config.synonyms_per_source);
  } else {
    syn_probs.resize(config.synonyms_per_source);
    for (int j = 0; j < config.synonyms_per_source; ++j) {
      syn_probs[j] = config.synonym_probs[j];
    }
  }
  const int n_function = config.function_word_count();

  std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> pairs;
  pairs.reserve(config.n_pairs);
  for (int p = 0; p < config.n_pairs; ++p) {
    const int len = draw_length(rng, config.source_length);
    std::vector<int> source_ids(len);
    std::vector<std::string> src(len);
    for (int i = 0; i < len; ++i) {
      source_ids[i] = static_cast<int>(
          rng.uniform_below(static_cast<uint64_t>(config.source_vocab_size)));
      src[i] = source_token(source_ids[i]);
    }
    std::vector<std::string> tgt(len);
    for (int i = 0; i < len; ++i) {
      const int j = rng.categorical(syn_probs);
      tgt[i] = synonym_token(source_ids[i], j);
    }
    if (config.p_swap > 0.0) {
      for (int i = 0; i + 1 < static_cast<int>(tgt.size()); ++i) {
        if (rng.uniform01() < config.p_swap) std::swap(tgt[i], tgt[i + 1]);
      }
    }
    if (config.function_word_rate > 0.0) {
      const int64_t inserts = rng.poisson(config.function_word_rate);
      for (int64_t k = 0; k < inserts; ++k) {
        const int f = static_cast<int>(
            rng.uniform_below(static_cast<uint64_t>(n_function)));
        const size_t pos = rng.uniform_below(tgt.size() + 1);
        tgt.insert(tgt.begin() + pos, function_token(f));
      }
    }
    pairs.emplace_back(std::move(src), std::move(tgt));
  }
  return pairs;
}

ParallelCorpus corpus_from_token_pairs(
    const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>&
        pairs) {
  ParallelCorpus corpus;
  corpus.pairs.reserve(pairs.size());
  for (const auto& [src, tgt] : pairs) {
    ParallelPair pair;
    pair.source.reserve(src.size());
    for (const auto& tok : src) pair.source.push_back(corpus.source_vocab.add(tok));
    pair.target.reserve(tgt.size());
    for (const auto& tok : tgt) pair.target.push_back(corpus.target_vocab.add(tok));
    corpus.pairs.push_back(std::move(pair));
  }
  return corpus;
}

ParallelCorpus generate_corpus(const CorpusConfig& config) {
  return corpus_from_token_pairs(generate_token_pairs(config));
}

std::vector<std::pair<Sentence, double>> enumerate_reference_distribution(
    const CorpusConfig& config, const ParallelCorpus& corpus,
    const Sentence& source) {
  config.validate();
  if (config.p_swap != 0.0 || config.function_word_rate != 0.0) {
    throw ContractError(
        "reference enumeration requires synonym noise only");
  }
  Eigen::ArrayXd syn_probs;
  if (config.synonym_probs.empty()) {
    syn_probs = Eigen::ArrayXd::Constant(config.synonyms_per_source,
                                         1.0 / config.synonyms_per_source);
  } else {
    syn_probs.resize(config.synonyms_per_source);
    for (int j = 0; j < config.synonyms_per_source; ++j) {
      syn_probs[j] = config.synonym_probs[j];
    }
  }

  std::vector<std::pair<Sentence, double>> outcomes = {{Sentence{}, 1.0}};
  for (TokenId src_id : source) {
    const std::string src_tok = corpus.source_vocab.token(src_id);
    const int src_index = std::stoi(src_tok.substr(1));
    std::vector<std::pair<Sentence, double>> extended;
    extended.reserve(outcomes.size() * config.synonyms_per_source);
    for (const auto& [prefix, prob] : outcomes) {
      for (int j = 0; j < config.synonyms_per_source; ++j) {
        if (syn_probs[j] <= 0.0) continue;
        const std::string tok = synonym_token(src_index, j);
        if (!corpus.target_vocab.contains(tok)) {
          throw ContractError("synonym '" + tok + "' never occurred in the corpus");
        }
        Sentence next = prefix;
        next.push_back(corpus.target_vocab.id(tok));
        extended.emplace_back(std::move(next), prob * syn_probs[j]);
      }
    }
    outcomes = std::move(extended);
  }
  return outcomes;
}

SplitResult split_heldout(const ParallelCorpus& corpus, int n_heldout) {
  if (n_heldout < 1) throw ConfigError("n_heldout must be >= 1");

  SplitResult result;
  result.train.source_vocab = corpus.source_vocab;
  result.train.target_vocab = corpus.target_vocab;
  result.heldout.source_vocab = corpus.source_vocab;
  result.heldout.target_vocab = corpus.target_vocab;

  // Exact-duplicate pairs collapse to their first occurrence; pairs where
  // only one side repeats stay in.
  std::vector<ParallelPair> deduped;
  deduped.reserve(corpus.pairs.size());
  std::set<std::pair<Sentence, Sentence>> seen;
  for (const auto& pair : corpus.pairs) {
    if (seen.emplace(pair.source, pair.target).second) {
      deduped.push_back(pair);
    } else {
      result.duplicates_removed += 1;
    }
  }

  if (n_heldout >= static_cast<int>(deduped.size())) {
    throw ConfigError("n_heldout (" + std::to_string(n_heldout) +
                      ") must be smaller than the deduplicated corpus (" +
                      std::to_string(deduped.size()) + ")");
  }

  const size_t split_at = deduped.size() - static_cast<size_t>(n_heldout);
  std::set<Sentence> heldout_sources;
  std::set<Sentence> heldout_targets;
  for (size_t i = split_at; i < deduped.size(); ++i) {
    result.heldout.pairs.push_back(deduped[i]);
    heldout_sources.insert(deduped[i].source);
    heldout_targets.insert(deduped[i].target);
  }
  for (size_t i = 0; i < split_at; ++i) {
    if (heldout_sources.count(deduped[i].source) ||
        heldout_targets.count(deduped[i].target)) {
      result.overlap_dropped += 1;
      continue;
    }
    result.train.pairs.push_back(deduped[i]);
  }
  if (result.train.pairs.empty()) {
    throw ConfigError("held-out overlap removal emptied the training corpus");
  }
  return result;
}

}  // namespace seqdec
