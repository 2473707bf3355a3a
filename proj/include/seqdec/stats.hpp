#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "seqdec/decode.hpp"
#include "seqdec/model.hpp"

namespace seqdec {

namespace groups {
inline constexpr const char* kTraining = "training";
inline constexpr const char* kReference = "reference";
inline constexpr const char* kSampling = "sampling";
inline constexpr const char* kBeam = "beam";
}  // namespace groups

using TokenPair = std::pair<TokenId, TokenId>;

struct GroupStatistics {
  std::string label;
  std::vector<int> lengths;
  std::map<TokenId, int64_t> unigrams;
  std::map<TokenPair, int64_t> bigrams;       // adjacent pairs, no boundaries
  std::map<TokenPair, int64_t> skip_bigrams;  // all ordered pairs i < j

  int64_t total_unigrams() const;
  int64_t total_skip_bigrams() const;
};

GroupStatistics extract_group_statistics(const std::vector<Sentence>& sentences,
                                         const std::string& label);

// Running cumulative exact probability of the distinct sentences in a sample
// stream, each counted once at its first occurrence.
struct MassCurve {
  std::vector<double> coverage;  // c_1 .. c_S
  int unique_count = 0;
  double final_coverage() const {
    return coverage.empty() ? 0.0 : coverage.back();
  }
};

MassCurve mass_curve(const ConditionalSequenceModel& model,
                     const Sentence& source, const SampleSet& samples);

bool beam_in_samples(const Sentence& beam_output, const SampleSet& samples);

struct EmptyStringStats {
  bool occurred = false;
  int count = 0;
};

EmptyStringStats empty_string_stats(const SampleSet& samples);

// Fraction of sample sets whose samples are pairwise distinct.
double all_unique_rate(const std::vector<SampleSet>& sample_sets);

}  // namespace seqdec
