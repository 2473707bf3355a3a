#include "seqdec/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace seqdec {

using nlohmann::json;

namespace {

json parse_line(const std::string& line, const std::string& path) {
  json doc = json::parse(line, nullptr, false);
  if (doc.is_discarded()) {
    throw ConfigError("malformed JSON line in " + path);
  }
  return doc;
}

std::vector<std::string> string_list(const json& value) {
  std::vector<std::string> out;
  out.reserve(value.size());
  for (const auto& item : value) out.push_back(item.get<std::string>());
  return out;
}

json token_array(const Vocabulary& vocab, const Sentence& sentence) {
  json arr = json::array();
  for (TokenId t : sentence) arr.push_back(vocab.token(t));
  return arr;
}

}  // namespace

std::string format_double(double value) { return json(value).dump(); }

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << contents;
  if (!out) throw ConfigError("failed to write '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_corpus_jsonl(const ParallelCorpus& corpus, const std::string& path) {
  std::ostringstream out;
  for (const auto& pair : corpus.pairs) {
    json row;
    row["src"] = token_array(corpus.source_vocab, pair.source);
    row["tgt"] = token_array(corpus.target_vocab, pair.target);
    out << row.dump() << '\n';
  }
  write_text_file(path, out.str());
}

ParallelCorpus read_corpus_jsonl(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> pairs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json row = parse_line(line, path);
    if (!row.contains("src") || !row.contains("tgt")) {
      throw ConfigError("corpus line missing src/tgt in " + path);
    }
    pairs.emplace_back(string_list(row["src"]), string_list(row["tgt"]));
  }
  ParallelCorpus corpus;
  for (const auto& [src, tgt] : pairs) {
    ParallelPair pair;
    for (const auto& tok : src) pair.source.push_back(corpus.source_vocab.add(tok));
    for (const auto& tok : tgt) pair.target.push_back(corpus.target_vocab.add(tok));
    corpus.pairs.push_back(std::move(pair));
  }
  return corpus;
}

std::string tabular_model_to_json(const TabularConditionalModel& model) {
  const auto& options = model.options();
  json doc;
  doc["model"] = "tabular";
  doc["order"] = options.order;
  doc["smoothing"] = options.smoothing;
  doc["max_target_len"] = options.max_target_len;
  doc["source_conditioning"] =
      options.conditioning == SourceConditioning::kFullSentence
          ? "full_sentence"
          : "ngram_signature";
  doc["signature_order"] = options.signature_order;
  doc["source_vocab"] = model.source_vocab().tokens();
  doc["target_vocab"] = model.target_vocab().tokens();

  json sources = json::array();
  for (const auto& [sentence, key] : model.source_ids()) {
    json row;
    row["tokens"] = token_array(model.source_vocab(), sentence);
    row["key"] = key;
    sources.push_back(std::move(row));
  }
  doc["sources"] = std::move(sources);

  json tables = json::array();
  for (const auto& [key, table] : model.tables()) {
    json contexts = json::array();
    for (const auto& [history, row] : table) {
      json counts = json::array();
      for (const auto& [token, count] : row.counts) {
        counts.push_back({model.target_vocab().token(token), count});
      }
      json ctx;
      ctx["history"] = token_array(model.target_vocab(), history);
      ctx["counts"] = std::move(counts);
      contexts.push_back(std::move(ctx));
    }
    json entry;
    entry["key"] = key;
    entry["contexts"] = std::move(contexts);
    tables.push_back(std::move(entry));
  }
  doc["tables"] = std::move(tables);
  return doc.dump(2);
}

TabularConditionalModel tabular_model_from_json(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("malformed model JSON");
  if (doc.value("model", "") != "tabular") {
    throw ConfigError("not a tabular model document");
  }

  auto rebuild_vocab = [](const json& tokens) {
    Vocabulary vocab;
    bool first = true;
    for (const auto& tok : tokens) {
      const std::string s = tok.get<std::string>();
      if (first) {
        if (s != Vocabulary::eos_token()) {
          throw ConfigError("vocabulary must start with the EOS token");
        }
        first = false;
        continue;
      }
      vocab.add(s);
    }
    return vocab;
  };

  TabularOptions options;
  options.order = doc.at("order").get<int>();
  options.smoothing = doc.at("smoothing").get<double>();
  options.max_target_len = doc.at("max_target_len").get<int>();
  options.signature_order = doc.value("signature_order", 2);
  options.conditioning =
      doc.value("source_conditioning", "full_sentence") == "ngram_signature"
          ? SourceConditioning::kNgramSignature
          : SourceConditioning::kFullSentence;

  Vocabulary source_vocab = rebuild_vocab(doc.at("source_vocab"));
  Vocabulary target_vocab = rebuild_vocab(doc.at("target_vocab"));
  TabularConditionalModel model(source_vocab, target_vocab, options);

  for (const auto& row : doc.at("sources")) {
    model.register_source(source_vocab.encode(string_list(row.at("tokens"))),
                          row.at("key").get<uint64_t>());
  }
  for (const auto& entry : doc.at("tables")) {
    TabularConditionalModel::ContextTable table;
    for (const auto& ctx : entry.at("contexts")) {
      TabularConditionalModel::ContextCounts row;
      for (const auto& cell : ctx.at("counts")) {
        const TokenId token = target_vocab.id(cell.at(0).get<std::string>());
        const int64_t count = cell.at(1).get<int64_t>();
        row.counts[token] = count;
        row.total += count;
      }
      table[target_vocab.encode(string_list(ctx.at("history")))] = std::move(row);
    }
    model.insert_table(entry.at("key").get<uint64_t>(), std::move(table));
  }
  return model;
}

void save_tabular_model(const TabularConditionalModel& model,
                        const std::string& path) {
  write_text_file(path, tabular_model_to_json(model) + "\n");
}

TabularConditionalModel load_tabular_model(const std::string& path) {
  return tabular_model_from_json(read_text_file(path));
}

void write_sample_sets(const std::vector<SampleSet>& sets,
                       const Vocabulary& vocab, const std::string& path) {
  std::ostringstream out;
  for (size_t i = 0; i < sets.size(); ++i) {
    for (size_t r = 0; r < sets[i].samples.size(); ++r) {
      json row;
      row["src_id"] = sets[i].source_index;
      row["replicate"] = r;
      row["tokens"] = token_array(vocab, sets[i].samples[r].sentence);
      row["log_prob"] = sets[i].samples[r].log_prob;
      out << row.dump() << '\n';
    }
  }
  write_text_file(path, out.str());
}

std::vector<SampleRecord> read_sample_records(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<SampleRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json row = parse_line(line, path);
    SampleRecord rec;
    rec.src_id = row.at("src_id").get<int>();
    rec.replicate = row.at("replicate").get<int>();
    rec.tokens = string_list(row.at("tokens"));
    rec.log_prob = row.at("log_prob").get<double>();
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<SampleSet> sample_sets_from_records(
    const std::vector<SampleRecord>& records, Vocabulary& vocab) {
  std::vector<SampleSet> sets;
  std::map<int, size_t> index;
  for (const auto& rec : records) {
    auto it = index.find(rec.src_id);
    if (it == index.end()) {
      it = index.emplace(rec.src_id, sets.size()).first;
      sets.emplace_back();
      sets.back().source_index = static_cast<uint32_t>(rec.src_id);
    }
    Sentence sentence;
    sentence.reserve(rec.tokens.size());
    for (const auto& tok : rec.tokens) sentence.push_back(vocab.add(tok));
    sets[it->second].samples.push_back(
        {std::move(sentence), rec.log_prob, rec.log_prob});
  }
  for (auto& set : sets) set.rebuild_index();
  return sets;
}

void write_scored_jsonl(const std::vector<std::pair<int, ScoredSentence>>& rows,
                        const Vocabulary& vocab, const std::string& path) {
  std::ostringstream out;
  for (const auto& [src_id, scored] : rows) {
    json row;
    row["src_id"] = src_id;
    row["tokens"] = token_array(vocab, scored.sentence);
    row["log_prob"] = scored.log_prob;
    row["search_score"] = scored.search_score;
    out << row.dump() << '\n';
  }
  write_text_file(path, out.str());
}

std::vector<ScoredRecord> read_scored_jsonl(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<ScoredRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json row = parse_line(line, path);
    ScoredRecord rec;
    rec.src_id = row.at("src_id").get<int>();
    rec.tokens = string_list(row.at("tokens"));
    rec.log_prob = row.at("log_prob").get<double>();
    rec.search_score = row.value("search_score", rec.log_prob);
    records.push_back(std::move(rec));
  }
  return records;
}

void write_decisions_jsonl(
    const std::vector<std::pair<int, DecisionResult>>& rows,
    const Vocabulary& vocab, const std::string& path, bool dump_eu) {
  std::ostringstream out;
  for (const auto& [src_id, decision] : rows) {
    json row;
    row["src_id"] = src_id;
    row["tokens"] = token_array(vocab, decision.chosen);
    row["expected_utility"] = decision.expected_utility;
    if (dump_eu) {
      json table = json::array();
      for (const auto& [candidate, eu] : decision.candidate_utilities) {
        json cell;
        cell["tokens"] = token_array(vocab, candidate);
        cell["eu"] = eu;
        table.push_back(std::move(cell));
      }
      row["candidates"] = std::move(table);
    }
    out << row.dump() << '\n';
  }
  write_text_file(path, out.str());
}

}  // namespace seqdec
