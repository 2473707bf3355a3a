// Command-line front end: corpus generation, splitting, training, the three
// decoders, MBR/oracle selection, distribution statistics and the Bayesian
// analysis, plus the full pipeline.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <json.hpp>

#include "seqdec/bayes/length.hpp"
#include "seqdec/bayes/lexical.hpp"
#include "seqdec/enumerate.hpp"
#include "seqdec/io.hpp"
#include "seqdec/pipeline.hpp"
#include "seqdec/stats.hpp"

using nlohmann::json;
using nlohmann::ordered_json;
using namespace seqdec;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;
constexpr int kExitInternal = 4;

struct GlobalArgs {
  uint64_t seed = 1;
  std::string config_path;
  std::string out_dir = ".";
  std::string format = "json";
};

json load_config(const GlobalArgs& args) {
  if (args.config_path.empty()) return json::object();
  json doc = json::parse(read_text_file(args.config_path), nullptr, false);
  if (doc.is_discarded()) {
    throw ConfigError("malformed config file '" + args.config_path + "'");
  }
  return doc;
}

RunConfig make_run_config(const GlobalArgs& args, bool seed_given) {
  json doc = load_config(args);
  if (seed_given || !doc.contains("seed")) doc["seed"] = args.seed;
  return run_config_from_json(doc);
}

std::string out_path(const GlobalArgs& args, const std::string& name) {
  std::filesystem::create_directories(args.out_dir);
  return args.out_dir + "/" + name;
}

std::vector<std::pair<int, Sentence>> corpus_sources(const ParallelCorpus& corpus) {
  std::vector<std::pair<int, Sentence>> out;
  for (size_t i = 0; i < corpus.pairs.size(); ++i) {
    out.emplace_back(static_cast<int>(i), corpus.pairs[i].source);
  }
  return out;
}

// Re-encode a corpus file against the model's vocabularies. Source tokens
// unknown to the model map to an id the count tables cannot contain.
Sentence encode_lossy(const Vocabulary& vocab,
                      const std::vector<std::string>& tokens) {
  Sentence out;
  out.reserve(tokens.size());
  for (const auto& tok : tokens) {
    out.push_back(vocab.contains(tok) ? vocab.id(tok) : TokenId{-1});
  }
  return out;
}

std::vector<std::pair<int, Sentence>> sources_for_model(
    const TabularConditionalModel& model, const std::string& corpus_path) {
  const ParallelCorpus corpus = read_corpus_jsonl(corpus_path);
  std::vector<std::pair<int, Sentence>> out;
  for (size_t i = 0; i < corpus.pairs.size(); ++i) {
    std::vector<std::string> tokens =
        corpus.source_vocab.decode(corpus.pairs[i].source);
    out.emplace_back(static_cast<int>(i),
                     encode_lossy(model.source_vocab(), tokens));
  }
  return out;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"decoding rules and model criticism for conditional sequence models"};
  app.require_subcommand(1);

  GlobalArgs args;
  bool seed_given = false;
  app.add_option("--seed", args.seed, "master random seed")
      ->each([&](const std::string&) { seed_given = true; });
  app.add_option("--config", args.config_path, "JSON config file");
  app.add_option("--out", args.out_dir, "output directory");
  app.add_option("--format", args.format, "summary output format")
      ->check(CLI::IsMember({"json", "csv"}));

  // ---- gen-corpus ----
  auto* gen = app.add_subcommand("gen-corpus", "generate a synthetic parallel corpus");

  // ---- split ----
  auto* split_cmd = app.add_subcommand("split", "deduplicate and hold out pairs");
  std::string split_corpus;
  int split_heldout_n = -1;
  split_cmd->add_option("--corpus", split_corpus, "corpus JSONL")->required();
  split_cmd->add_option("--n-heldout", split_heldout_n, "held-out pair count");

  // ---- train ----
  auto* train_cmd = app.add_subcommand("train", "fit the count-based model");
  std::string train_corpus;
  train_cmd->add_option("--corpus", train_corpus, "training corpus JSONL")->required();

  // ---- sample ----
  auto* sample_cmd = app.add_subcommand("sample", "draw ancestral sample sets");
  std::string sample_model, sample_corpus;
  int sample_n = -1;
  sample_cmd->add_option("--model", sample_model, "model JSON")->required();
  sample_cmd->add_option("--corpus", sample_corpus, "sources JSONL")->required();
  sample_cmd->add_option("--n-samples", sample_n, "samples per source");

  // ---- beam ----
  auto* beam_cmd = app.add_subcommand("beam", "beam-search decode");
  std::string beam_model, beam_corpus;
  int beam_width = -1;
  double beam_penalty = -1.0;
  beam_cmd->add_option("--model", beam_model, "model JSON")->required();
  beam_cmd->add_option("--corpus", beam_corpus, "sources JSONL")->required();
  beam_cmd->add_option("--width", beam_width, "beam width");
  beam_cmd->add_option("--length-penalty", beam_penalty, "penalty exponent");

  // ---- exact-mode ----
  auto* exact_cmd = app.add_subcommand("exact-mode", "branch-and-bound MAP decode");
  std::string exact_model, exact_corpus;
  long exact_budget = -1;
  exact_cmd->add_option("--model", exact_model, "model JSON")->required();
  exact_cmd->add_option("--corpus", exact_corpus, "sources JSONL")->required();
  exact_cmd->add_option("--node-budget", exact_budget, "search node budget");

  // ---- mbr ----
  auto* mbr_cmd = app.add_subcommand("mbr", "sampling-based MBR decision");
  std::string mbr_samples, mbr_utility = "";
  bool mbr_dump_eu = false;
  mbr_cmd->add_option("--samples", mbr_samples, "sample set JSONL")->required();
  mbr_cmd->add_option("--utility", mbr_utility, "utility name");
  mbr_cmd->add_flag("--dump-eu", mbr_dump_eu, "emit per-candidate utilities");

  // ---- oracle ----
  auto* oracle_cmd = app.add_subcommand("oracle", "reference-oracle selection");
  std::string oracle_samples, oracle_refs, oracle_utility = "";
  oracle_cmd->add_option("--samples", oracle_samples, "sample set JSONL")->required();
  oracle_cmd->add_option("--references", oracle_refs, "reference corpus JSONL")
      ->required();
  oracle_cmd->add_option("--utility", oracle_utility, "utility name");

  // ---- stats ----
  auto* stats_cmd = app.add_subcommand("stats", "distribution diagnostics");
  std::string stats_model, stats_corpus, stats_samples, stats_beam;
  stats_cmd->add_option("--model", stats_model, "model JSON")->required();
  stats_cmd->add_option("--corpus", stats_corpus, "held-out corpus JSONL")->required();
  stats_cmd->add_option("--samples", stats_samples, "sample set JSONL")->required();
  stats_cmd->add_option("--beam", stats_beam, "beam output JSONL")->required();

  // ---- bayes ----
  auto* bayes_cmd = app.add_subcommand("bayes", "hierarchical Bayesian analysis");
  std::string bayes_train, bayes_refs, bayes_samples, bayes_beam;
  bayes_cmd->add_option("--train-corpus", bayes_train, "training corpus JSONL")
      ->required();
  bayes_cmd->add_option("--references", bayes_refs, "reference corpus JSONL")
      ->required();
  bayes_cmd->add_option("--samples", bayes_samples, "sample set JSONL")->required();
  bayes_cmd->add_option("--beam", bayes_beam, "beam output JSONL")->required();

  // ---- run ----
  auto* run_cmd = app.add_subcommand("run", "full pipeline");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const RunConfig config = make_run_config(args, seed_given);
  const Utility utility = make_utility(config.utility_name, config.meteor);

  if (gen->parsed()) {
    const ParallelCorpus corpus = generate_corpus(config.corpus);
    write_corpus_jsonl(corpus, out_path(args, "corpus.jsonl"));
    std::cout << "wrote " << corpus.pairs.size() << " pairs\n";
    return kExitOk;
  }

  if (split_cmd->parsed()) {
    const ParallelCorpus corpus = read_corpus_jsonl(split_corpus);
    const int n = split_heldout_n > 0 ? split_heldout_n : config.n_heldout;
    const SplitResult split = split_heldout(corpus, n);
    write_corpus_jsonl(split.train, out_path(args, "train.jsonl"));
    write_corpus_jsonl(split.heldout, out_path(args, "heldout.jsonl"));
    std::cout << "train " << split.train.pairs.size() << ", heldout "
              << split.heldout.pairs.size() << ", duplicates removed "
              << split.duplicates_removed << ", overlap dropped "
              << split.overlap_dropped << "\n";
    return kExitOk;
  }

  if (train_cmd->parsed()) {
    const ParallelCorpus corpus = read_corpus_jsonl(train_corpus);
    TabularOptions options;
    options.order = config.model_order;
    options.smoothing = config.smoothing;
    options.max_target_len = config.max_target_len;
    options.conditioning = config.conditioning;
    options.signature_order = config.signature_order;
    const TabularConditionalModel model = fit_tabular(corpus, options);
    save_tabular_model(model, out_path(args, "model.json"));
    std::cout << "fitted on " << corpus.pairs.size() << " pairs\n";
    return kExitOk;
  }

  if (sample_cmd->parsed()) {
    const TabularConditionalModel model = load_tabular_model(sample_model);
    const auto sources = sources_for_model(model, sample_corpus);
    const int n = sample_n > 0 ? sample_n : config.n_samples;
    std::vector<SampleSet> sets;
    sets.reserve(sources.size());
    for (const auto& [src_id, source] : sources) {
      sets.push_back(draw_sample_set(model, source, n, config.seed,
                                     static_cast<uint32_t>(src_id)));
    }
    write_sample_sets(sets, model.target_vocab(), out_path(args, "samples.jsonl"));
    std::cout << "sampled " << n << " per source for " << sources.size()
              << " sources\n";
    return kExitOk;
  }

  if (beam_cmd->parsed()) {
    const TabularConditionalModel model = load_tabular_model(beam_model);
    const auto sources = sources_for_model(model, beam_corpus);
    BeamConfig beam = config.beam;
    if (beam_width > 0) beam.width = beam_width;
    if (beam_penalty >= 0.0) beam.length_penalty = beam_penalty;
    std::vector<std::pair<int, ScoredSentence>> rows;
    for (const auto& [src_id, source] : sources) {
      rows.emplace_back(src_id, beam_search(model, source, beam));
    }
    write_scored_jsonl(rows, model.target_vocab(), out_path(args, "beam.jsonl"));
    std::cout << "decoded " << rows.size() << " sources\n";
    return kExitOk;
  }

  if (exact_cmd->parsed()) {
    const TabularConditionalModel model = load_tabular_model(exact_model);
    const auto sources = sources_for_model(model, exact_corpus);
    const long budget = exact_budget > 0 ? exact_budget : config.node_budget;
    std::vector<std::pair<int, ScoredSentence>> rows;
    for (const auto& [src_id, source] : sources) {
      rows.emplace_back(src_id, exact_mode(model, source, budget));
    }
    write_scored_jsonl(rows, model.target_vocab(), out_path(args, "exact_mode.jsonl"));
    std::cout << "decoded " << rows.size() << " sources\n";
    return kExitOk;
  }

  if (mbr_cmd->parsed()) {
    Vocabulary vocab;
    const auto sets =
        sample_sets_from_records(read_sample_records(mbr_samples), vocab);
    const Utility u = mbr_utility.empty() ? utility
                                          : make_utility(mbr_utility, config.meteor);
    std::vector<std::pair<int, DecisionResult>> rows;
    for (const auto& set : sets) {
      rows.emplace_back(static_cast<int>(set.source_index), mbr_decode(set, u));
    }
    write_decisions_jsonl(rows, vocab, out_path(args, "mbr.jsonl"),
                          mbr_dump_eu || config.dump_eu);
    std::cout << "decided " << rows.size() << " sources\n";
    return kExitOk;
  }

  if (oracle_cmd->parsed()) {
    Vocabulary vocab;
    const ParallelCorpus refs = read_corpus_jsonl(oracle_refs);
    std::vector<Sentence> references;
    for (const auto& pair : refs.pairs) {
      references.push_back(
          vocab.encode(refs.target_vocab.decode(pair.target)));
    }
    const auto sets =
        sample_sets_from_records(read_sample_records(oracle_samples), vocab);
    const Utility u = oracle_utility.empty()
                          ? utility
                          : make_utility(oracle_utility, config.meteor);
    std::vector<std::pair<int, ScoredSentence>> rows;
    for (const auto& set : sets) {
      const int src_id = static_cast<int>(set.source_index);
      if (src_id < 0 || src_id >= static_cast<int>(references.size())) {
        throw ConfigError("sample src_id " + std::to_string(src_id) +
                          " has no reference");
      }
      rows.emplace_back(src_id, oracle_select(set, references[src_id], u));
    }
    write_scored_jsonl(rows, vocab, out_path(args, "oracle.jsonl"));
    std::cout << "selected for " << rows.size() << " sources\n";
    return kExitOk;
  }

  if (stats_cmd->parsed()) {
    const TabularConditionalModel model = load_tabular_model(stats_model);
    Vocabulary vocab = model.target_vocab();
    const ParallelCorpus heldout = read_corpus_jsonl(stats_corpus);
    auto sets = sample_sets_from_records(read_sample_records(stats_samples), vocab);
    const auto beam_rows = read_scored_jsonl(stats_beam);

    std::ostringstream curves;
    curves << "src_id,t,coverage\n";
    int beam_in_count = 0;
    int empty_count = 0;
    for (auto& set : sets) {
      const int src_id = static_cast<int>(set.source_index);
      if (src_id < 0 || src_id >= static_cast<int>(heldout.pairs.size())) {
        throw ConfigError("sample src_id " + std::to_string(src_id) +
                          " not present in the corpus");
      }
      set.source = encode_lossy(
          model.source_vocab(),
          heldout.source_vocab.decode(heldout.pairs[src_id].source));
      const MassCurve curve = mass_curve(model, set.source, set);
      for (size_t t = 0; t < curve.coverage.size(); ++t) {
        curves << src_id << ',' << (t + 1) << ','
               << format_double(curve.coverage[t]) << '\n';
      }
      empty_count += empty_string_stats(set).occurred ? 1 : 0;
    }
    for (const auto& rec : beam_rows) {
      if (rec.src_id < 0 || rec.src_id >= static_cast<int>(sets.size())) continue;
      Sentence beam_sentence;
      for (const auto& tok : rec.tokens) beam_sentence.push_back(vocab.add(tok));
      beam_in_count += beam_in_samples(beam_sentence, sets[rec.src_id]) ? 1 : 0;
    }
    write_text_file(out_path(args, "mass_curves.csv"), curves.str());

    ordered_json summary;
    summary["sources"] = sets.size();
    summary["beam_in_samples_rate"] =
        sets.empty() ? 0.0 : static_cast<double>(beam_in_count) / sets.size();
    summary["empty_string_rate"] =
        sets.empty() ? 0.0 : static_cast<double>(empty_count) / sets.size();
    summary["all_unique_rate"] = all_unique_rate(sets);
    if (args.format == "csv") {
      std::ostringstream csv;
      csv << "metric,value\n";
      for (const auto& [key, value] : summary.items()) {
        csv << key << ',' << value.dump() << '\n';
      }
      write_text_file(out_path(args, "summary.csv"), csv.str());
    } else {
      write_text_file(out_path(args, "summary.json"), summary.dump(2) + "\n");
    }
    std::cout << "stats for " << sets.size() << " sources\n";
    return kExitOk;
  }

  if (bayes_cmd->parsed()) {
    const ParallelCorpus train = read_corpus_jsonl(bayes_train);
    Vocabulary vocab = train.target_vocab;
    const ParallelCorpus refs = read_corpus_jsonl(bayes_refs);
    auto sets = sample_sets_from_records(read_sample_records(bayes_samples), vocab);
    const auto beam_rows = read_scored_jsonl(bayes_beam);

    std::vector<Sentence> train_targets, references, sampled, beams;
    for (const auto& pair : train.pairs) train_targets.push_back(pair.target);
    for (const auto& pair : refs.pairs) {
      references.push_back(vocab.encode(refs.target_vocab.decode(pair.target)));
    }
    for (const auto& set : sets) {
      if (!set.samples.empty()) sampled.push_back(set.samples[0].sentence);
    }
    for (const auto& rec : beam_rows) {
      Sentence s;
      for (const auto& tok : rec.tokens) s.push_back(vocab.add(tok));
      beams.push_back(std::move(s));
    }

    const auto train_stats = extract_group_statistics(train_targets, groups::kTraining);
    std::map<std::string, GroupStatistics> group_stats;
    group_stats[groups::kReference] =
        extract_group_statistics(references, groups::kReference);
    group_stats[groups::kSampling] =
        extract_group_statistics(sampled, groups::kSampling);
    group_stats[groups::kBeam] = extract_group_statistics(beams, groups::kBeam);

    auto lengths_of = [](const GroupStatistics& s) {
      return std::vector<int64_t>(s.lengths.begin(), s.lengths.end());
    };

    LengthFitOptions length_options;
    length_options.svi = config.svi;
    length_options.svi.seed = derive_seed(config.seed, 1, 1);
    const auto length_train = fit_length_train(lengths_of(train_stats), length_options);
    std::map<std::string, std::vector<int64_t>> length_groups;
    for (const auto& [label, s] : group_stats) length_groups[label] = lengths_of(s);
    SviOptions test_svi = config.svi;
    test_svi.seed = derive_seed(config.seed, 1, 2);
    const auto length_test = fit_length_test(length_train, length_groups, test_svi);

    const int content = vocab.content_size();
    auto dense = [&](const GroupStatistics& s) {
      Eigen::ArrayXd uni = Eigen::ArrayXd::Zero(content);
      Eigen::ArrayXXd bi = Eigen::ArrayXXd::Zero(content, content);
      for (const auto& [t, c] : s.unigrams) uni[t - 1] += static_cast<double>(c);
      for (const auto& [p, c] : s.bigrams) {
        bi(p.first - 1, p.second - 1) += static_cast<double>(c);
      }
      return std::make_pair(uni, bi);
    };
    const auto [train_uni, train_bi] = dense(train_stats);
    SviOptions lex_svi = config.svi;
    lex_svi.seed = derive_seed(config.seed, 1, 3);
    const auto lexical_train = fit_lexical_train(train_uni, train_bi, lex_svi);
    std::map<std::string, Eigen::ArrayXd> group_unis;
    std::map<std::string, Eigen::ArrayXXd> group_bis;
    for (const auto& [label, s] : group_stats) {
      auto [uni, bi] = dense(s);
      group_unis[label] = uni;
      group_bis[label] = bi;
    }
    SviOptions lex_test_svi = config.svi;
    lex_test_svi.seed = derive_seed(config.seed, 1, 5);
    const auto lexical_test =
        fit_lexical_test(lexical_train, group_unis, group_bis, lex_test_svi);

    ordered_json doc;
    doc["length"] = {{"mu", length_train.expected_rate}};
    std::ostringstream samples_csv;
    samples_csv << "variable,sample,value\n";
    for (const auto& [label, q] : length_test.q_scale) {
      doc["length"]["groups"][label] = {{"shape", q.shape},
                                        {"rate", q.rate},
                                        {"mean_rate", length_test.mean_rate(label)}};
      const auto samples = length_test.rate_samples(
          label, config.posterior_samples, derive_seed(config.seed, 2, stable_hash(label)));
      for (size_t i = 0; i < samples.size(); ++i) {
        samples_csv << "length.rate." << label << ',' << i << ','
                    << format_double(samples[i]) << '\n';
      }
    }
    for (const auto& [label, q] : lexical_test.unigram.q_scale) {
      doc["unigram"]["groups"][label] = {{"shape", q.shape},
                                         {"rate", q.rate},
                                         {"mean", q.mean()}};
    }
    for (const auto& [label, q] : lexical_test.bigram.q_scale) {
      doc["bigram"]["groups"][label] = {{"shape", q.shape},
                                        {"rate", q.rate},
                                        {"mean", q.mean()}};
    }
    write_text_file(out_path(args, "posteriors.json"), doc.dump(2) + "\n");
    write_text_file(out_path(args, "posterior_samples.csv"), samples_csv.str());
    std::cout << "bayes analysis written\n";
    return kExitOk;
  }

  if (run_cmd->parsed()) {
    try {
      const PipelineOutput output = run_pipeline(config);
      write_pipeline_output(output, args.out_dir);
    } catch (const StageError& e) {
      // Flush a failure marker so partial runs are visible downstream.
      ordered_json failed;
      failed["schema_version"] = 1;
      failed["failed"] = true;
      failed["stage"] = e.stage;
      failed["error"] = e.what();
      std::filesystem::create_directories(args.out_dir);
      write_text_file(args.out_dir + "/report.json", failed.dump(2) + "\n");
      throw;
    }
    std::cout << "report written to " << args.out_dir << "/report.json\n";
    return kExitOk;
  }

  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UnknownSourceError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kExitBudget;
  } catch (const StageError& e) {
    std::cerr << "pipeline failed at [" << e.stage << "]: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
