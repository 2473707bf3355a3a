#include <doctest.h>

#include <cmath>
#include <map>

#include "seqdec/corpus_gen.hpp"
#include "seqdec/enumerate.hpp"
#include "seqdec/io.hpp"
#include "seqdec/tabular_model.hpp"
#include "test_util.hpp"

using namespace seqdec;
using namespace seqdec::testutil;

namespace {

ParallelCorpus toy_corpus(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> toks;
  for (const auto& [src, tgt] : pairs) {
    toks.emplace_back(split_ws(src), split_ws(tgt));
  }
  return corpus_from_token_pairs(toks);
}

TabularOptions options_of(int order, double smoothing, int max_len) {
  TabularOptions opt;
  opt.order = order;
  opt.smoothing = smoothing;
  opt.max_target_len = max_len;
  return opt;
}

ParallelCorpus random_corpus(uint64_t seed, int max_pairs = 10) {
  Rng rng(seed);
  const int n = 1 + static_cast<int>(rng.uniform_below(max_pairs - 1));
  std::vector<std::pair<std::string, std::string>> pairs;
  for (int i = 0; i < n; ++i) {
    auto sentence = [&](int vocab, const char* prefix) {
      const int len = static_cast<int>(rng.uniform_below(4));
      std::string out;
      for (int j = 0; j < len; ++j) {
        if (j) out += ' ';
        out += prefix + std::to_string(rng.uniform_below(vocab));
      }
      return out;
    };
    pairs.emplace_back(sentence(3, "s"), sentence(3, "t"));
  }
  // Guard against an all-empty target side producing a trivial vocabulary.
  pairs.emplace_back("s0", "t0 t1");
  return toy_corpus(pairs);
}

double corpus_log_likelihood(const TabularConditionalModel& model,
                             const ParallelCorpus& corpus) {
  double total = 0.0;
  for (const auto& pair : corpus.pairs) {
    total += model.sequence_log_prob(pair.source, pair.target);
  }
  return total;
}

}  // namespace

TEST_CASE("vocabulary ids are dense with a fixed EOS slot") {
  Vocabulary vocab;
  CHECK(vocab.size() == 1);
  CHECK(vocab.token(Vocabulary::kEos) == std::string("</s>"));
  const TokenId a = vocab.add("a");
  const TokenId b = vocab.add("b");
  CHECK(a == 1);
  CHECK(b == 2);
  CHECK(vocab.add("a") == a);
  CHECK(vocab.id("b") == b);
  CHECK_THROWS_AS(vocab.add("</s>"), ConfigError);
  CHECK_THROWS_AS(vocab.add("<s>"), ConfigError);
  CHECK_THROWS_AS(vocab.id("missing"), ConfigError);
  CHECK_THROWS_AS((void)vocab.decode({Vocabulary::kEos}), ContractError);
}

TEST_CASE("tabular conditionals are relative frequencies without smoothing") {
  const auto corpus = toy_corpus({{"x", "a a"}, {"x", "a a"}, {"x", "b"}});
  const auto model = fit_tabular(corpus, options_of(2, 0.0, 10));
  const Sentence x = sent(corpus.source_vocab, "x");
  const auto& tv = corpus.target_vocab;

  const Eigen::ArrayXd first = model.next_distribution(x, {});
  CHECK(first[tv.id("a")] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(first[tv.id("b")] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(first[Vocabulary::kEos] == 0.0);

  // "b" is always sentence-final, so EOS follows it with certainty.
  const Eigen::ArrayXd after_b = model.next_distribution(x, sent(tv, "b"));
  CHECK(after_b[Vocabulary::kEos] == doctest::Approx(1.0));
  CHECK(model.sequence_log_prob(x, sent(tv, "b")) ==
        doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("explicit model induces conditionals consistent with its entries") {
  const auto model = ExplicitDistributionModel::from_strings(
      {{"a b", 0.3}, {"a c", 0.3}, {"b", 0.4}});
  const auto& tv = model.target_vocab();

  const Eigen::ArrayXd first = model.next_distribution({}, {});
  CHECK(first[tv.id("a")] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(first[tv.id("b")] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(model.sequence_log_prob({}, sent(tv, "a b")) ==
        doctest::Approx(std::log(0.3)).epsilon(1e-12));

  CHECK_THROWS_AS(model.next_distribution(sent(tv, "b"), {}),
                  UnknownSourceError);
}

TEST_CASE("empty target carries its explicit probability") {
  const auto model =
      ExplicitDistributionModel::from_strings({{"", 0.25}, {"a", 0.75}});
  CHECK(model.sequence_log_prob({}, {}) ==
        doctest::Approx(std::log(0.25)).epsilon(1e-12));
}

TEST_CASE("the length cap forces EOS and rejects longer prefixes") {
  const auto corpus = toy_corpus({{"x", "a a a a"}});
  const auto model = fit_tabular(corpus, options_of(1, 0.01, 3));
  const Sentence x = sent(corpus.source_vocab, "x");
  const Sentence prefix = sent(corpus.target_vocab, "a a a");

  const Eigen::ArrayXd forced = model.next_distribution(x, prefix);
  CHECK(forced[Vocabulary::kEos] == 1.0);
  CHECK(forced.sum() == doctest::Approx(1.0));

  Sentence too_long = prefix;
  too_long.push_back(corpus.target_vocab.id("a"));
  CHECK_THROWS_AS(model.next_distribution(x, too_long), ContractError);
}

TEST_CASE("fit_tabular add-lambda arithmetic and validation") {
  const auto corpus = toy_corpus({{"x", "a"}, {"x", "a"}, {"x", "b"}});
  const Sentence x = sent(corpus.source_vocab, "x");

  const auto mle = fit_tabular(corpus, options_of(1, 0.0, 10));
  CHECK(mle.next_distribution(x, {})[corpus.target_vocab.id("a")] ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  // Two content tokens plus EOS smooth the denominator: (2+1)/(3+3).
  const auto smoothed = fit_tabular(corpus, options_of(1, 1.0, 10));
  CHECK(smoothed.next_distribution(x, {})[corpus.target_vocab.id("a")] ==
        doctest::Approx(0.5).epsilon(1e-12));

  CHECK_THROWS_AS(fit_tabular(corpus, options_of(0, 0.0, 10)), ConfigError);
  CHECK_THROWS_AS(fit_tabular(corpus, options_of(1, 0.0, 0)), ConfigError);
  CHECK_THROWS_AS(fit_tabular(ParallelCorpus{}, options_of(1, 0.0, 10)),
                  ConfigError);
}

TEST_CASE("training likelihood is maximised by the unsmoothed fit") {
  const auto corpus =
      toy_corpus({{"x", "a b"}, {"x", "a"}, {"y", "b b a"}, {"y", ""}});
  const double mle = corpus_log_likelihood(
      fit_tabular(corpus, options_of(1, 0.0, 10)), corpus);
  for (double lambda : {0.01, 1.0}) {
    const double smoothed = corpus_log_likelihood(
        fit_tabular(corpus, options_of(1, lambda, 10)), corpus);
    CHECK(mle >= smoothed);
  }
}

TEST_CASE("enumerate_support reads back explicit entries in order") {
  const auto model = ExplicitDistributionModel::from_strings(
      {{"a b", 0.3}, {"a c", 0.3}, {"b", 0.4}});
  const auto support = enumerate_support(model, {});
  const auto& tv = model.target_vocab();
  REQUIRE(support.size() == 3);
  CHECK(text(tv, support[0].sentence) == "b");
  CHECK(support[0].probability == doctest::Approx(0.4).epsilon(1e-9));
  CHECK(text(tv, support[1].sentence) == "a b");  // probability tie: lex order
  CHECK(text(tv, support[2].sentence) == "a c");

  const auto point = ExplicitDistributionModel::from_strings({{"a", 1.0}});
  const auto point_support = enumerate_support(point, {});
  REQUIRE(point_support.size() == 1);
  CHECK(point_support[0].probability == doctest::Approx(1.0));
}

TEST_CASE("enumerate_support covers the smoothed tabular support") {
  const auto corpus = toy_corpus({{"x", "a"}, {"x", "a"}, {"x", "b"}});
  const auto model = fit_tabular(corpus, options_of(1, 0.0, 6));
  const auto support =
      enumerate_support(model, sent(corpus.source_vocab, "x"));
  double mass = 0.0;
  for (const auto& entry : support) mass += entry.probability;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("enumerate_support reports budget exhaustion") {
  UniformFixedLengthModel model(10, 6);  // a million outcomes
  CHECK_THROWS_AS(enumerate_support(model, {}, 1000), BudgetError);
}

TEST_CASE("next_distribution normalises across random models and prefixes") {
  int probes = 0;
  for (uint64_t seed = 0; seed < 40; ++seed) {
    const auto corpus = random_corpus(seed);
    const auto model =
        fit_tabular(corpus, options_of(1 + seed % 3, (seed % 2) * 0.05, 6));
    Rng rng(seed * 77 + 1);
    for (int probe = 0; probe < 25; ++probe) {
      const auto& pair = corpus.pairs[rng.uniform_below(corpus.pairs.size())];
      Sentence prefix;
      const int len = static_cast<int>(rng.uniform_below(4));
      for (int j = 0; j < len; ++j) {
        prefix.push_back(static_cast<TokenId>(
            1 + rng.uniform_below(corpus.target_vocab.size() - 1)));
      }
      const Eigen::ArrayXd dist = model.next_distribution(pair.source, prefix);
      CHECK(std::abs(dist.sum() - 1.0) < 1e-9);
      CHECK((dist >= 0.0).all());
      ++probes;
    }
  }
  CHECK(probes == 1000);
}

TEST_CASE("sequence_log_prob equals the per-step product") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const auto model = random_explicit_model(seed);
    const auto support = enumerate_support(model, {});
    for (const auto& entry : support) {
      double chained = 0.0;
      Sentence prefix;
      for (size_t j = 0; j <= entry.sentence.size(); ++j) {
        const TokenId next =
            j < entry.sentence.size() ? entry.sentence[j] : Vocabulary::kEos;
        chained += std::log(model.next_distribution({}, prefix)[next]);
        if (j < entry.sentence.size()) prefix.push_back(next);
      }
      const double direct = model.sequence_log_prob({}, entry.sentence);
      CHECK(std::abs(direct - chained) <=
            1e-12 * std::max(1.0, std::abs(chained)));
    }
  }
}

TEST_CASE("enumeration recovers explicit supports exactly") {
  for (uint64_t seed = 100; seed < 150; ++seed) {
    const auto model = random_explicit_model(seed);
    const auto support = enumerate_support(model, {});
    const auto& entries = model.entries({});
    REQUIRE(support.size() == entries.size());
    std::map<Sentence, double> expected;
    for (const auto& [sentence, prob] : entries) expected[sentence] = prob;
    for (const auto& entry : support) {
      REQUIRE(expected.count(entry.sentence) == 1);
      CHECK(entry.probability ==
            doctest::Approx(expected[entry.sentence]).epsilon(1e-9));
    }
  }
}

TEST_CASE("unsmoothed fits reproduce hand-computed conditional frequencies") {
  for (uint64_t seed = 0; seed < 25; ++seed) {
    const auto corpus = random_corpus(seed, 9);
    const int order = 1 + static_cast<int>(seed % 3);
    const auto model = fit_tabular(corpus, options_of(order, 0.0, 8));

    // Independent recount, straight from the pairs. Histories shorter than
    // the order occur exactly at the sentence start, so they are full
    // prefixes and next_distribution can be probed with them directly.
    std::map<std::pair<Sentence, Sentence>, std::map<TokenId, int>> counts;
    for (const auto& pair : corpus.pairs) {
      const int len = static_cast<int>(pair.target.size());
      for (int j = 0; j <= len; ++j) {
        const int hist = std::min(order, j);
        Sentence history(pair.target.begin() + (j - hist),
                         pair.target.begin() + j);
        const TokenId next = j < len ? pair.target[j] : Vocabulary::kEos;
        counts[{pair.source, history}][next] += 1;
      }
    }
    for (const auto& [key, row] : counts) {
      const Sentence& prefix = key.second;
      if (static_cast<int>(prefix.size()) >= order) continue;
      int total = 0;
      for (const auto& [t, c] : row) total += c;
      const Eigen::ArrayXd dist = model.next_distribution(key.first, prefix);
      for (const auto& [t, c] : row) {
        CHECK(dist[t] ==
              doctest::Approx(static_cast<double>(c) / total).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("model JSON round-trips behaviourally") {
  const auto corpus =
      toy_corpus({{"x y", "a b"}, {"x", "a"}, {"z", "b b"}, {"z", ""}});
  for (auto conditioning : {SourceConditioning::kFullSentence,
                            SourceConditioning::kNgramSignature}) {
    auto options = options_of(2, 0.01, 8);
    options.conditioning = conditioning;
    const auto model = fit_tabular(corpus, options);
    const auto restored = tabular_model_from_json(tabular_model_to_json(model));
    for (const auto& pair : corpus.pairs) {
      const auto a = model.next_distribution(pair.source, {});
      const auto b = restored.next_distribution(pair.source, {});
      REQUIRE(a.size() == b.size());
      for (int t = 0; t < a.size(); ++t) CHECK(a[t] == b[t]);
      CHECK(model.sequence_log_prob(pair.source, pair.target) ==
            restored.sequence_log_prob(pair.source, pair.target));
    }
  }
}

TEST_CASE("corpus JSONL round-trips with stable pair order") {
  const auto corpus =
      toy_corpus({{"x y", "a b"}, {"", "a"}, {"z", ""}, {"x y", "a b"}});
  const std::string path = "corpus_roundtrip_test.jsonl";
  write_corpus_jsonl(corpus, path);
  const auto restored = read_corpus_jsonl(path);
  REQUIRE(restored.pairs.size() == corpus.pairs.size());
  CHECK(restored.source_vocab == corpus.source_vocab);
  CHECK(restored.target_vocab == corpus.target_vocab);
  for (size_t i = 0; i < corpus.pairs.size(); ++i) {
    CHECK(restored.pairs[i] == corpus.pairs[i]);
  }
  std::remove(path.c_str());
}
