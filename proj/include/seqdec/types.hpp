#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "seqdec/errors.hpp"

namespace seqdec {

using TokenId = int32_t;

// A sentence is a sequence of content-token ids. The end-of-sequence marker
// is implicit: it is drawn by models but never stored, so the empty sentence
// is a perfectly valid value.
using Sentence = std::vector<TokenId>;

std::string join_tokens(const std::vector<std::string>& toks);

// Dense string<->id table. Id 0 is always the end-of-sequence symbol; the
// begin-of-sequence symbol is purely notional (an empty prefix) and never
// occupies an id.
class Vocabulary {
 public:
  static constexpr TokenId kEos = 0;
  static const char* eos_token() { return "</s>"; }
  static const char* bos_token() { return "<s>"; }

  Vocabulary();

  // Adds a content token (or returns its existing id).
  TokenId add(const std::string& token);
  // Id lookup; throws ConfigError for unknown tokens.
  TokenId id(const std::string& token) const;
  bool contains(const std::string& token) const;
  const std::string& token(TokenId id) const;

  // Total number of ids, end-of-sequence included.
  int size() const { return static_cast<int>(tokens_.size()); }
  // Number of content tokens (ids 1..size-1).
  int content_size() const { return size() - 1; }

  Sentence encode(const std::vector<std::string>& tokens) const;
  std::vector<std::string> decode(const Sentence& sentence) const;

  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

struct ParallelPair {
  Sentence source;
  Sentence target;
  bool operator==(const ParallelPair& other) const = default;
};

struct ParallelCorpus {
  Vocabulary source_vocab;
  Vocabulary target_vocab;
  std::vector<ParallelPair> pairs;

  bool empty() const { return pairs.empty(); }
  size_t size() const { return pairs.size(); }
};

}  // namespace seqdec
