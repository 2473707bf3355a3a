#include "seqdec/types.hpp"

#include <sstream>

namespace seqdec {

std::string join_tokens(const std::vector<std::string>& toks) {
  std::string out;
  for (size_t i = 0; i < toks.size(); ++i) {
    if (i) out += ' ';
    out += toks[i];
  }
  return out;
}

Vocabulary::Vocabulary() {
  tokens_.push_back(eos_token());
  index_[eos_token()] = kEos;
}

TokenId Vocabulary::add(const std::string& token) {
  if (token == eos_token() || token == bos_token()) {
    throw ConfigError("reserved token '" + token +
                      "' cannot be added as a content token");
  }
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  TokenId id = static_cast<TokenId>(tokens_.size());
  tokens_.push_back(token);
  index_[token] = id;
  return id;
}

TokenId Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) throw ConfigError("unknown token '" + token + "'");
  return it->second;
}

bool Vocabulary::contains(const std::string& token) const {
  return index_.count(token) > 0;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || id >= size()) {
    throw ContractError("token id out of range: " + std::to_string(id));
  }
  return tokens_[static_cast<size_t>(id)];
}

Sentence Vocabulary::encode(const std::vector<std::string>& tokens) const {
  Sentence out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

std::vector<std::string> Vocabulary::decode(const Sentence& sentence) const {
  std::vector<std::string> out;
  out.reserve(sentence.size());
  for (TokenId t : sentence) {
    if (t == kEos) throw ContractError("sentence contains the EOS id");
    out.push_back(token(t));
  }
  return out;
}

}  // namespace seqdec
