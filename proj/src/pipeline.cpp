#include "seqdec/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "seqdec/bayes/length.hpp"
#include "seqdec/bayes/lexical.hpp"
#include "seqdec/io.hpp"
#include "seqdec/stats.hpp"

namespace seqdec {

using nlohmann::json;
using nlohmann::ordered_json;

void RunConfig::validate() const {
  corpus.validate();
  if (n_heldout < 1) throw ConfigError("n_heldout must be >= 1");
  if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
  if (single_sample_replicates < 1) {
    throw ConfigError("single_sample_replicates must be >= 1");
  }
  if (posterior_samples < 1) throw ConfigError("posterior_samples must be >= 1");
  if (threads < 0) throw ConfigError("threads must be >= 0");
  TabularOptions model_options;
  model_options.order = model_order;
  model_options.smoothing = smoothing;
  model_options.max_target_len = max_target_len;
  model_options.conditioning = conditioning;
  model_options.signature_order = signature_order;
  model_options.validate();
  beam.validate();
  make_utility(utility_name, meteor);
}

RunConfig run_config_from_json(const json& doc) {
  RunConfig config;
  config.seed = doc.value("seed", config.seed);
  config.threads = doc.value("threads", config.threads);
  config.corpus.seed = config.seed;

  if (doc.contains("corpus")) {
    const json& c = doc["corpus"];
    config.corpus.source_vocab_size =
        c.value("source_vocab_size", config.corpus.source_vocab_size);
    config.corpus.target_vocab_size =
        c.value("target_vocab_size", config.corpus.target_vocab_size);
    config.corpus.n_pairs = c.value("n_pairs", config.corpus.n_pairs);
    config.corpus.synonyms_per_source =
        c.value("k_syn", config.corpus.synonyms_per_source);
    if (c.contains("synonym_probs")) {
      config.corpus.synonym_probs =
          c["synonym_probs"].get<std::vector<double>>();
    }
    config.corpus.p_swap = c.value("p_swap", config.corpus.p_swap);
    config.corpus.function_word_rate =
        c.value("function_word_rate", config.corpus.function_word_rate);
    if (c.contains("source_length")) {
      const json& l = c["source_length"];
      config.corpus.source_length.kind =
          l.value("kind", config.corpus.source_length.kind);
      config.corpus.source_length.min_len =
          l.value("min", config.corpus.source_length.min_len);
      config.corpus.source_length.max_len =
          l.value("max", config.corpus.source_length.max_len);
      config.corpus.source_length.mean =
          l.value("mean", config.corpus.source_length.mean);
    }
    config.corpus.seed = c.value("seed", config.corpus.seed);
  }
  if (doc.contains("split")) {
    config.n_heldout = doc["split"].value("n_heldout", config.n_heldout);
  }
  if (doc.contains("model")) {
    const json& m = doc["model"];
    config.model_order = m.value("order", config.model_order);
    config.smoothing = m.value("smoothing", config.smoothing);
    config.max_target_len = m.value("max_target_len", config.max_target_len);
    const std::string cond = m.value(
        "conditioning",
        config.conditioning == SourceConditioning::kNgramSignature
            ? std::string("ngram_signature")
            : std::string("full_sentence"));
    if (cond == "ngram_signature") {
      config.conditioning = SourceConditioning::kNgramSignature;
    } else if (cond == "full_sentence") {
      config.conditioning = SourceConditioning::kFullSentence;
    } else {
      throw ConfigError("unknown conditioning '" + cond + "'");
    }
    config.signature_order = m.value("signature_order", config.signature_order);
  }
  if (doc.contains("decode")) {
    const json& d = doc["decode"];
    config.n_samples = d.value("n_samples", config.n_samples);
    config.beam.width = d.value("beam_width", config.beam.width);
    config.beam.length_penalty =
        d.value("length_penalty", config.beam.length_penalty);
    config.beam.max_width = d.value("max_beam_width", config.beam.max_width);
    config.node_budget = d.value("node_budget", config.node_budget);
  }
  if (doc.contains("utility")) {
    const json& u = doc["utility"];
    config.utility_name = u.value("name", config.utility_name);
    config.meteor.gamma = u.value("gamma", config.meteor.gamma);
    config.meteor.beta = u.value("beta", config.meteor.beta);
    config.meteor.recall_weight =
        u.value("recall_weight", config.meteor.recall_weight);
  }
  if (doc.contains("bayes")) {
    const json& b = doc["bayes"];
    config.bayes_enabled = b.value("enabled", config.bayes_enabled);
    config.svi.steps = b.value("svi_steps", config.svi.steps);
    config.svi.mc_samples = b.value("mc_samples", config.svi.mc_samples);
    config.svi.learning_rate =
        b.value("learning_rate", config.svi.learning_rate);
    config.posterior_samples =
        b.value("posterior_samples", config.posterior_samples);
    config.predictive_replicates =
        b.value("predictive_replicates", config.predictive_replicates);
  }
  if (doc.contains("report")) {
    const json& r = doc["report"];
    config.dump_eu = r.value("dump_eu", config.dump_eu);
    config.single_sample_replicates =
        r.value("single_sample_replicates", config.single_sample_replicates);
  }
  config.validate();
  return config;
}

ordered_json run_config_to_json(const RunConfig& config) {
  ordered_json doc;
  doc["seed"] = config.seed;
  doc["threads"] = config.threads;
  doc["corpus"] = {
      {"source_vocab_size", config.corpus.source_vocab_size},
      {"target_vocab_size", config.corpus.target_vocab_size},
      {"n_pairs", config.corpus.n_pairs},
      {"k_syn", config.corpus.synonyms_per_source},
      {"synonym_probs", config.corpus.synonym_probs},
      {"p_swap", config.corpus.p_swap},
      {"function_word_rate", config.corpus.function_word_rate},
      {"source_length",
       {{"kind", config.corpus.source_length.kind},
        {"min", config.corpus.source_length.min_len},
        {"max", config.corpus.source_length.max_len},
        {"mean", config.corpus.source_length.mean}}},
      {"seed", config.corpus.seed}};
  doc["split"] = {{"n_heldout", config.n_heldout}};
  doc["model"] = {
      {"order", config.model_order},
      {"smoothing", config.smoothing},
      {"max_target_len", config.max_target_len},
      {"conditioning",
       config.conditioning == SourceConditioning::kNgramSignature
           ? "ngram_signature"
           : "full_sentence"},
      {"signature_order", config.signature_order}};
  doc["decode"] = {{"n_samples", config.n_samples},
                   {"beam_width", config.beam.width},
                   {"length_penalty", config.beam.length_penalty},
                   {"max_beam_width", config.beam.max_width},
                   {"node_budget", config.node_budget}};
  doc["utility"] = {{"name", config.utility_name},
                    {"gamma", config.meteor.gamma},
                    {"beta", config.meteor.beta},
                    {"recall_weight", config.meteor.recall_weight}};
  doc["bayes"] = {{"enabled", config.bayes_enabled},
                  {"svi_steps", config.svi.steps},
                  {"mc_samples", config.svi.mc_samples},
                  {"learning_rate", config.svi.learning_rate},
                  {"posterior_samples", config.posterior_samples},
                  {"predictive_replicates", config.predictive_replicates}};
  doc["report"] = {{"dump_eu", config.dump_eu},
                   {"single_sample_replicates", config.single_sample_replicates}};
  return doc;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    threads = std::min(threads, 8);
  }
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& worker : pool) worker.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

struct PerSource {
  SampleSet samples;
  ScoredSentence beam;
  ScoredSentence exact;
  DecisionResult mbr;
  ScoredSentence oracle;
  std::vector<double> replicate_utilities;
  double sample_utility = 0.0;  // replicate 0
  double beam_utility = 0.0;
  double exact_utility = 0.0;
  double mbr_utility = 0.0;
  double oracle_utility = 0.0;
  MassCurve curve;
  bool beam_in = false;
  EmptyStringStats empty_stats;
};

double mean_of(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

double sample_stddev(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double mean = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

// Content-token counts as dense arrays indexed by token id - 1.
struct DenseCounts {
  Eigen::ArrayXd unigrams;
  Eigen::ArrayXXd bigrams;
  Eigen::ArrayXXd skip_bigrams;
};

DenseCounts dense_counts(const GroupStatistics& stats, int content_vocab) {
  DenseCounts out;
  out.unigrams = Eigen::ArrayXd::Zero(content_vocab);
  out.bigrams = Eigen::ArrayXXd::Zero(content_vocab, content_vocab);
  out.skip_bigrams = Eigen::ArrayXXd::Zero(content_vocab, content_vocab);
  for (const auto& [t, c] : stats.unigrams) {
    out.unigrams[t - 1] += static_cast<double>(c);
  }
  for (const auto& [p, c] : stats.bigrams) {
    out.bigrams(p.first - 1, p.second - 1) += static_cast<double>(c);
  }
  for (const auto& [p, c] : stats.skip_bigrams) {
    out.skip_bigrams(p.first - 1, p.second - 1) += static_cast<double>(c);
  }
  return out;
}

ordered_json moment_report_json(const LengthPredictiveReport& report) {
  ordered_json doc;
  doc["replicates"] = report.replicates;
  ordered_json moments = ordered_json::array();
  for (size_t k = 0; k < report.moments.size(); ++k) {
    const auto& m = report.moments[k];
    moments.push_back({{"order", k + 1},
                       {"observed", m.observed},
                       {"lo", m.lo},
                       {"hi", m.hi},
                       {"inside", m.inside}});
  }
  doc["moments"] = std::move(moments);
  doc["all_inside"] = report.all_inside();
  return doc;
}

ordered_json lexical_report_json(const LexicalPredictiveReport& report) {
  return ordered_json{{"replicates", report.replicates},
                      {"mean_abs_error", report.mean_abs_error},
                      {"rank_correlation", report.rank_correlation},
                      {"degenerate", report.degenerate}};
}

ordered_json gamma_json(const GammaParams& params) {
  return ordered_json{{"shape", params.shape},
                      {"rate", params.rate},
                      {"mean", params.mean()}};
}

std::string tokens_text(const Vocabulary& vocab, const Sentence& sentence) {
  return join_tokens(vocab.decode(sentence));
}

ordered_json scored_json(const Vocabulary& vocab, const ScoredSentence& s) {
  return ordered_json{{"tokens", vocab.decode(s.sentence)},
                      {"log_prob", s.log_prob},
                      {"search_score", s.search_score}};
}

void append_posterior_samples(std::ostringstream& csv, const std::string& name,
                              const std::vector<double>& samples) {
  for (size_t i = 0; i < samples.size(); ++i) {
    csv << name << ',' << i << ',' << format_double(samples[i]) << '\n';
  }
}

}  // namespace

PipelineOutput run_pipeline(const RunConfig& config) {
  config.validate();
  const Utility utility = make_utility(config.utility_name, config.meteor);

  // --- corpus ----------------------------------------------------------
  ParallelCorpus corpus;
  SplitResult split;
  try {
    corpus = generate_corpus(config.corpus);
  } catch (const std::exception& e) {
    throw StageError("generate", e.what());
  }
  try {
    split = split_heldout(corpus, config.n_heldout);
  } catch (const std::exception& e) {
    throw StageError("split", e.what());
  }

  // --- model -----------------------------------------------------------
  TabularOptions model_options;
  model_options.order = config.model_order;
  model_options.smoothing = config.smoothing;
  model_options.max_target_len = config.max_target_len;
  model_options.conditioning = config.conditioning;
  model_options.signature_order = config.signature_order;
  std::unique_ptr<TabularConditionalModel> model;
  try {
    model = std::make_unique<TabularConditionalModel>(
        fit_tabular(split.train, model_options));
  } catch (const std::exception& e) {
    throw StageError("train", e.what());
  }

  // --- decoding --------------------------------------------------------
  const int n_sources = static_cast<int>(split.heldout.pairs.size());
  std::vector<PerSource> decoded(n_sources);
  const uint64_t sample_stream = derive_seed(config.seed, 0, 1);
  const uint64_t replicate_stream = derive_seed(config.seed, 0, 2);
  try {
    parallel_for(n_sources, config.threads, [&](int i) {
      const Sentence& source = split.heldout.pairs[i].source;
      const Sentence& reference = split.heldout.pairs[i].target;
      PerSource& out = decoded[i];

      out.samples = draw_sample_set(*model, source, config.n_samples,
                                    sample_stream, static_cast<uint32_t>(i));
      BeamConfig beam = config.beam;
      out.beam = beam_search(*model, source, beam);
      out.exact = exact_mode(*model, source, config.node_budget);
      out.mbr = mbr_decode(out.samples, utility);
      out.oracle = oracle_select(out.samples, reference, utility);

      out.replicate_utilities.resize(config.single_sample_replicates);
      for (int r = 0; r < config.single_sample_replicates; ++r) {
        const ScoredSentence draw = ancestral_sample(
            *model, source,
            derive_seed(replicate_stream, static_cast<uint64_t>(i),
                        static_cast<uint64_t>(r)));
        out.replicate_utilities[r] = utility(reference, draw.sentence);
      }

      out.sample_utility = utility(reference, out.samples.samples[0].sentence);
      out.beam_utility = utility(reference, out.beam.sentence);
      out.exact_utility = utility(reference, out.exact.sentence);
      out.mbr_utility = utility(reference, out.mbr.chosen);
      out.oracle_utility = utility(reference, out.oracle.sentence);

      out.curve = mass_curve(*model, source, out.samples);
      out.beam_in = beam_in_samples(out.beam.sentence, out.samples);
      out.empty_stats = empty_string_stats(out.samples);
    });
  } catch (const BudgetError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("decode", e.what());
  }

  // --- aggregation -----------------------------------------------------
  ordered_json report;
  std::map<std::string, std::string> csv;
  try {
    report["schema_version"] = 1;
    report["failed"] = false;
    report["config"] = run_config_to_json(config);
    report["corpus"] = {
        {"pairs_generated", corpus.pairs.size()},
        {"duplicates_removed", split.duplicates_removed},
        {"overlap_dropped", split.overlap_dropped},
        {"train_pairs", split.train.pairs.size()},
        {"heldout_pairs", split.heldout.pairs.size()},
        {"source_vocab", corpus.source_vocab.size()},
        {"target_vocab", corpus.target_vocab.size()}};

    std::vector<double> beam_u, exact_u, mbr_u, oracle_u;
    for (const auto& d : decoded) {
      beam_u.push_back(d.beam_utility);
      exact_u.push_back(d.exact_utility);
      mbr_u.push_back(d.mbr_utility);
      oracle_u.push_back(d.oracle_utility);
    }
    std::vector<double> replicate_means(config.single_sample_replicates, 0.0);
    for (int r = 0; r < config.single_sample_replicates; ++r) {
      double total = 0.0;
      for (const auto& d : decoded) total += d.replicate_utilities[r];
      replicate_means[r] = total / static_cast<double>(n_sources);
    }
    report["table"] = {
        {"utility", utility.name()},
        {"beam", mean_of(beam_u)},
        {"exact_mode", mean_of(exact_u)},
        {"mbr", mean_of(mbr_u)},
        {"oracle", mean_of(oracle_u)},
        {"single_sample",
         {{"mean", mean_of(replicate_means)},
          {"stddev", sample_stddev(replicate_means)},
          {"replicates", replicate_means}}}};

    std::ostringstream replicate_csv;
    replicate_csv << "replicate,mean_utility\n";
    for (int r = 0; r < config.single_sample_replicates; ++r) {
      replicate_csv << r << ',' << format_double(replicate_means[r]) << '\n';
    }
    csv["replicate_utilities.csv"] = replicate_csv.str();
  } catch (const std::exception& e) {
    throw StageError("aggregate", e.what());
  }

  // --- distribution statistics -----------------------------------------
  GroupStatistics train_stats, reference_stats, sampling_stats, beam_stats;
  try {
    std::vector<Sentence> train_targets, references, sampled, beams;
    for (const auto& pair : split.train.pairs) train_targets.push_back(pair.target);
    for (const auto& pair : split.heldout.pairs) references.push_back(pair.target);
    for (const auto& d : decoded) {
      sampled.push_back(d.samples.samples[0].sentence);
      beams.push_back(d.beam.sentence);
    }
    train_stats = extract_group_statistics(train_targets, groups::kTraining);
    reference_stats = extract_group_statistics(references, groups::kReference);
    sampling_stats = extract_group_statistics(sampled, groups::kSampling);
    beam_stats = extract_group_statistics(beams, groups::kBeam);

    std::vector<SampleSet> sets;
    for (const auto& d : decoded) sets.push_back(d.samples);
    int beam_in_count = 0;
    int empty_occurred = 0;
    std::vector<double> coverages;
    for (const auto& d : decoded) {
      beam_in_count += d.beam_in ? 1 : 0;
      empty_occurred += d.empty_stats.occurred ? 1 : 0;
      coverages.push_back(d.curve.final_coverage());
    }
    report["stats"] = {
        {"beam_in_samples_rate",
         static_cast<double>(beam_in_count) / n_sources},
        {"empty_string_rate", static_cast<double>(empty_occurred) / n_sources},
        {"all_unique_rate", all_unique_rate(sets)},
        {"mean_final_coverage", mean_of(coverages)},
        {"stddev_final_coverage", sample_stddev(coverages)}};

    std::ostringstream curve_csv;
    curve_csv << "src_id,t,coverage\n";
    for (int i = 0; i < n_sources; ++i) {
      for (size_t t = 0; t < decoded[i].curve.coverage.size(); ++t) {
        curve_csv << i << ',' << (t + 1) << ','
                  << format_double(decoded[i].curve.coverage[t]) << '\n';
      }
    }
    csv["mass_curves.csv"] = curve_csv.str();

    const auto& tvocab = corpus.target_vocab;
    std::ostringstream unigram_csv, bigram_csv, skip_csv, length_csv;
    unigram_csv << "group,token,count\n";
    bigram_csv << "group,first,second,count\n";
    skip_csv << "group,first,second,count\n";
    length_csv << "group,sentence,length\n";
    for (const GroupStatistics* stats :
         {&train_stats, &reference_stats, &sampling_stats, &beam_stats}) {
      for (const auto& [t, c] : stats->unigrams) {
        unigram_csv << stats->label << ',' << tvocab.token(t) << ',' << c << '\n';
      }
      for (const auto& [p, c] : stats->bigrams) {
        bigram_csv << stats->label << ',' << tvocab.token(p.first) << ','
                   << tvocab.token(p.second) << ',' << c << '\n';
      }
      for (const auto& [p, c] : stats->skip_bigrams) {
        skip_csv << stats->label << ',' << tvocab.token(p.first) << ','
                 << tvocab.token(p.second) << ',' << c << '\n';
      }
      for (size_t i = 0; i < stats->lengths.size(); ++i) {
        length_csv << stats->label << ',' << i << ',' << stats->lengths[i]
                   << '\n';
      }
    }
    csv["group_unigrams.csv"] = unigram_csv.str();
    csv["group_bigrams.csv"] = bigram_csv.str();
    csv["group_skip_bigrams.csv"] = skip_csv.str();
    csv["group_lengths.csv"] = length_csv.str();
  } catch (const std::exception& e) {
    throw StageError("stats", e.what());
  }

  // --- hierarchical Bayesian analysis -----------------------------------
  if (config.bayes_enabled) {
    try {
      std::ostringstream posterior_csv;
      posterior_csv << "variable,sample,value\n";

      auto lengths_of = [](const GroupStatistics& stats) {
        std::vector<int64_t> out;
        out.reserve(stats.lengths.size());
        for (int n : stats.lengths) out.push_back(n);
        return out;
      };

      LengthFitOptions length_options;
      length_options.svi = config.svi;
      length_options.svi.record_elbo = false;
      length_options.svi.seed = derive_seed(config.seed, 1, 1);
      const auto length_train =
          fit_length_train(lengths_of(train_stats), length_options);

      std::map<std::string, std::vector<int64_t>> length_groups;
      length_groups[groups::kReference] = lengths_of(reference_stats);
      length_groups[groups::kSampling] = lengths_of(sampling_stats);
      length_groups[groups::kBeam] = lengths_of(beam_stats);
      SviOptions test_svi = config.svi;
      test_svi.record_elbo = false;
      test_svi.seed = derive_seed(config.seed, 1, 2);
      const auto length_test =
          fit_length_test(length_train, length_groups, test_svi);

      ordered_json length_json;
      length_json["mu"] = length_train.expected_rate;
      length_json["q_alpha"] = gamma_json(length_train.q_alpha);
      length_json["q_beta"] = gamma_json(length_train.q_beta);
      length_json["mean_posterior_rate"] = length_train.mean_posterior_rate();
      ordered_json length_group_json;
      for (const auto& [label, q] : length_test.q_scale) {
        length_group_json[label] = {
            {"q_scale", gamma_json(q)},
            {"mean_rate", length_test.mean_rate(label)}};
        append_posterior_samples(
            posterior_csv, "length.rate." + label,
            length_test.rate_samples(label, config.posterior_samples,
                                     derive_seed(config.seed, 2,
                                                 stable_hash(label))));
      }
      length_json["groups"] = std::move(length_group_json);

      const int content_vocab = corpus.target_vocab.content_size();
      const DenseCounts train_counts = dense_counts(train_stats, content_vocab);
      std::map<std::string, DenseCounts> group_counts;
      group_counts[groups::kReference] =
          dense_counts(reference_stats, content_vocab);
      group_counts[groups::kSampling] =
          dense_counts(sampling_stats, content_vocab);
      group_counts[groups::kBeam] = dense_counts(beam_stats, content_vocab);

      SviOptions lex_svi = config.svi;
      lex_svi.record_elbo = false;
      lex_svi.seed = derive_seed(config.seed, 1, 3);
      const auto lexical_train = fit_lexical_train(
          train_counts.unigrams, train_counts.bigrams, lex_svi);
      SviOptions skip_svi = config.svi;
      skip_svi.record_elbo = false;
      skip_svi.seed = derive_seed(config.seed, 1, 4);
      const auto skip_train = fit_lexical_train(
          train_counts.unigrams, train_counts.skip_bigrams, skip_svi);

      std::map<std::string, Eigen::ArrayXd> group_unigrams;
      std::map<std::string, Eigen::ArrayXXd> group_bigrams, group_skips;
      for (const auto& [label, counts] : group_counts) {
        group_unigrams[label] = counts.unigrams;
        group_bigrams[label] = counts.bigrams;
        group_skips[label] = counts.skip_bigrams;
      }
      SviOptions lex_test_svi = config.svi;
      lex_test_svi.record_elbo = false;
      lex_test_svi.seed = derive_seed(config.seed, 1, 5);
      const auto lexical_test = fit_lexical_test(lexical_train, group_unigrams,
                                                 group_bigrams, lex_test_svi);
      SviOptions skip_test_svi = config.svi;
      skip_test_svi.record_elbo = false;
      skip_test_svi.seed = derive_seed(config.seed, 1, 6);
      const auto skip_test = fit_lexical_test(skip_train, group_unigrams,
                                              group_skips, skip_test_svi);

      auto agreement_json = [&](const AgreementPosterior& posterior,
                                const std::string& variable) {
        ordered_json out;
        for (const auto& [label, q] : posterior.q_scale) {
          out[label] = {{"q_scale", gamma_json(q)}, {"mean", q.mean()}};
          append_posterior_samples(
              posterior_csv, variable + "." + label,
              posterior.scale_samples(label, config.posterior_samples,
                                      derive_seed(config.seed, 3,
                                                  stable_hash(variable + label))));
        }
        return out;
      };

      ordered_json bayes_json;
      bayes_json["length"] = std::move(length_json);
      bayes_json["unigram"] = {
          {"q_alpha", gamma_json(lexical_train.q_alpha)},
          {"groups", agreement_json(lexical_test.unigram, "unigram.s")}};
      bayes_json["bigram"] = {
          {"q_beta", gamma_json(lexical_train.q_beta)},
          {"groups", agreement_json(lexical_test.bigram, "bigram.m")}};
      bayes_json["skip_bigram"] = {
          {"q_beta", gamma_json(skip_train.q_beta)},
          {"groups", agreement_json(skip_test.bigram, "skip_bigram.m")}};

      // Predictive checks confirm the analysis models fit what they model.
      ordered_json checks;
      checks["length_train"] = moment_report_json(predictive_check_length(
          length_train, lengths_of(train_stats), config.predictive_replicates,
          derive_seed(config.seed, 4, 1)));
      ordered_json group_checks;
      for (const auto& [label, lengths] : length_groups) {
        group_checks[label] = moment_report_json(predictive_check_length(
            length_test, label, lengths, config.predictive_replicates,
            derive_seed(config.seed, 4,
                        stable_hash(label))));
      }
      checks["length_groups"] = std::move(group_checks);
      checks["unigram_train"] = lexical_report_json(predictive_check_lexical(
          lexical_train, train_counts.unigrams, config.predictive_replicates,
          derive_seed(config.seed, 5, 1)));
      ordered_json lex_checks;
      for (const auto& [label, counts] : group_unigrams) {
        lex_checks[label] = lexical_report_json(predictive_check_lexical(
            lexical_test, label, counts, config.predictive_replicates,
            derive_seed(config.seed, 5, stable_hash(label))));
      }
      checks["unigram_groups"] = std::move(lex_checks);
      bayes_json["predictive_checks"] = std::move(checks);

      report["bayes"] = std::move(bayes_json);
      csv["posterior_samples.csv"] = posterior_csv.str();
    } catch (const std::exception& e) {
      throw StageError("bayes", e.what());
    }
  }

  // --- per-source detail -------------------------------------------------
  try {
    const auto& svocab = corpus.source_vocab;
    const auto& tvocab = corpus.target_vocab;
    ordered_json sources = ordered_json::array();
    std::ostringstream eu_csv;
    eu_csv << "src_id,candidate,eu\n";
    for (int i = 0; i < n_sources; ++i) {
      const auto& d = decoded[i];
      ordered_json row;
      row["src_id"] = i;
      row["source"] = svocab.decode(split.heldout.pairs[i].source);
      row["reference"] = tvocab.decode(split.heldout.pairs[i].target);
      row["sample"] = scored_json(tvocab, d.samples.samples[0]);
      row["beam"] = scored_json(tvocab, d.beam);
      row["exact_mode"] = scored_json(tvocab, d.exact);
      row["mbr"] = {{"tokens", tvocab.decode(d.mbr.chosen)},
                    {"expected_utility", d.mbr.expected_utility}};
      row["oracle"] = scored_json(tvocab, d.oracle);
      row["utilities"] = {{"sample", d.sample_utility},
                          {"beam", d.beam_utility},
                          {"exact_mode", d.exact_utility},
                          {"mbr", d.mbr_utility},
                          {"oracle", d.oracle_utility}};
      row["beam_in_samples"] = d.beam_in;
      row["empty_count"] = d.empty_stats.count;
      row["unique_samples"] = d.curve.unique_count;
      row["final_coverage"] = d.curve.final_coverage();
      sources.push_back(std::move(row));

      if (config.dump_eu) {
        for (const auto& [candidate, eu] : d.mbr.candidate_utilities) {
          eu_csv << i << ",\"" << tokens_text(tvocab, candidate) << "\","
                 << format_double(eu) << '\n';
        }
      }
    }
    report["sources"] = std::move(sources);
    if (config.dump_eu) csv["eu_tables.csv"] = eu_csv.str();
  } catch (const std::exception& e) {
    throw StageError("report", e.what());
  }

  PipelineOutput output;
  output.report = std::move(report);
  output.csv = std::move(csv);
  return output;
}

void write_pipeline_output(const PipelineOutput& output,
                           const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_text_file(out_dir + "/report.json", output.report.dump(2) + "\n");
  for (const auto& [name, contents] : output.csv) {
    write_text_file(out_dir + "/" + name, contents);
  }
}

}  // namespace seqdec
