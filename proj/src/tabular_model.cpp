#include "seqdec/tabular_model.hpp"

#include <algorithm>

#include "seqdec/rng.hpp"

namespace seqdec {

void TabularOptions::validate() const {
  if (order < 1) throw ConfigError("tabular order must be >= 1");
  if (max_target_len < 1) throw ConfigError("max_target_len must be >= 1");
  if (smoothing < 0.0) throw ConfigError("smoothing must be >= 0");
  if (conditioning == SourceConditioning::kNgramSignature && signature_order < 1) {
    throw ConfigError("signature order must be >= 1");
  }
}

TabularConditionalModel::TabularConditionalModel(Vocabulary source_vocab,
                                                 Vocabulary target_vocab,
                                                 TabularOptions options)
    : source_vocab_(std::move(source_vocab)),
      target_vocab_(std::move(target_vocab)),
      options_(options) {
  options_.validate();
}

uint64_t TabularConditionalModel::source_key(const Sentence& source,
                                             int position, bool* known) const {
  *known = true;
  if (options_.conditioning == SourceConditioning::kFullSentence) {
    auto it = source_ids_.find(source);
    if (it == source_ids_.end()) {
      *known = false;
      return 0;
    }
    return it->second;
  }
  // Hash of the source window starting at the current target position.
  const int len = static_cast<int>(source.size());
  const int begin = std::min(position, len);
  const int end = std::min(begin + options_.signature_order, len);
  uint64_t h = 0x51ed270b9f1c4c17ULL;
  for (int i = begin; i < end; ++i) {
    h = mix64(h ^ (static_cast<uint64_t>(static_cast<uint32_t>(source[i])) + 1));
  }
  return h;
}

void TabularConditionalModel::register_source(const Sentence& source,
                                              uint64_t key) {
  source_ids_.emplace(source, key);
  next_source_id_ = std::max(next_source_id_, key + 1);
}

void TabularConditionalModel::insert_table(uint64_t key, ContextTable table) {
  tables_[key] = std::move(table);
}

void TabularConditionalModel::observe(const Sentence& source,
                                      const Sentence& target) {
  if (options_.conditioning == SourceConditioning::kFullSentence &&
      source_ids_.find(source) == source_ids_.end()) {
    source_ids_.emplace(source, next_source_id_++);
  }
  const int k = options_.order;
  const int len = static_cast<int>(target.size());
  for (int j = 0; j <= len; ++j) {
    bool known;
    const uint64_t key = source_key(source, j, &known);
    const int hist_len = std::min(k, j);
    Sentence history(target.begin() + (j - hist_len), target.begin() + j);
    const TokenId next = j < len ? target[j] : Vocabulary::kEos;
    ContextCounts& row = tables_[key][history];
    row.counts[next] += 1;
    row.total += 1;
  }
}

Eigen::ArrayXd TabularConditionalModel::next_distribution_impl(
    const Sentence& source, const Sentence& prefix) const {
  const int v = target_vocab_.size();
  Eigen::ArrayXd dist = Eigen::ArrayXd::Zero(v);

  bool known = false;
  const uint64_t key =
      source_key(source, static_cast<int>(prefix.size()), &known);
  const ContextCounts* row = nullptr;
  if (known) {
    auto table_it = tables_.find(key);
    if (table_it != tables_.end()) {
      const int hist_len =
          std::min<int>(options_.order, static_cast<int>(prefix.size()));
      Sentence history(prefix.end() - hist_len, prefix.end());
      auto row_it = table_it->second.find(history);
      if (row_it != table_it->second.end()) row = &row_it->second;
    }
  }

  const double lambda = options_.smoothing;
  const int64_t total = row ? row->total : 0;
  const double denom = static_cast<double>(total) + lambda * v;
  if (denom <= 0.0) {
    // Unobserved context without smoothing: terminate deterministically.
    dist[Vocabulary::kEos] = 1.0;
    return dist;
  }
  dist.setConstant(lambda / denom);
  if (row) {
    for (const auto& [token, count] : row->counts) {
      dist[token] += static_cast<double>(count) / denom;
    }
  }
  return dist;
}

TabularConditionalModel fit_tabular(const ParallelCorpus& corpus,
                                    const TabularOptions& options) {
  options.validate();
  if (corpus.empty()) throw ConfigError("cannot fit on an empty corpus");
  TabularConditionalModel model(corpus.source_vocab, corpus.target_vocab,
                                options);
  for (const auto& pair : corpus.pairs) {
    model.observe(pair.source, pair.target);
  }
  return model;
}

}  // namespace seqdec
