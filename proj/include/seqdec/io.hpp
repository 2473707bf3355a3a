#pragma once

#include <string>
#include <utility>
#include <vector>

#include "seqdec/decode.hpp"
#include "seqdec/rules.hpp"
#include "seqdec/tabular_model.hpp"

namespace seqdec {

// Corpus: JSON lines, one {"src": [...], "tgt": [...]} object per pair.
// Vocabularies follow first occurrence, so write/read round-trips exactly.
void write_corpus_jsonl(const ParallelCorpus& corpus, const std::string& path);
ParallelCorpus read_corpus_jsonl(const std::string& path);

// Model: one self-describing JSON document.
std::string tabular_model_to_json(const TabularConditionalModel& model);
TabularConditionalModel tabular_model_from_json(const std::string& text);
void save_tabular_model(const TabularConditionalModel& model,
                        const std::string& path);
TabularConditionalModel load_tabular_model(const std::string& path);

// Sample sets: JSON lines, one
// {"src_id": ..., "replicate": ..., "tokens": [...], "log_prob": ...} per
// sample.
struct SampleRecord {
  int src_id = 0;
  int replicate = 0;
  std::vector<std::string> tokens;
  double log_prob = 0.0;
};

void write_sample_sets(const std::vector<SampleSet>& sets,
                       const Vocabulary& vocab, const std::string& path);
std::vector<SampleRecord> read_sample_records(const std::string& path);
// Re-encodes records against a vocabulary (extending it as needed) and
// groups them by src_id in file order.
std::vector<SampleSet> sample_sets_from_records(
    const std::vector<SampleRecord>& records, Vocabulary& vocab);

// Per-source decoder outputs: JSON lines with src_id, tokens and scores.
struct ScoredRecord {
  int src_id = 0;
  std::vector<std::string> tokens;
  double log_prob = 0.0;
  double search_score = 0.0;
};

void write_scored_jsonl(const std::vector<std::pair<int, ScoredSentence>>& rows,
                        const Vocabulary& vocab, const std::string& path);
std::vector<ScoredRecord> read_scored_jsonl(const std::string& path);

void write_decisions_jsonl(
    const std::vector<std::pair<int, DecisionResult>>& rows,
    const Vocabulary& vocab, const std::string& path, bool dump_eu);

// Shortest round-trip decimal form (what the JSON writer emits).
std::string format_double(double value);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

}  // namespace seqdec
