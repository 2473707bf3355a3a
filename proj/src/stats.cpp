#include "seqdec/stats.hpp"

#include <cmath>
#include <set>

namespace seqdec {

int64_t GroupStatistics::total_unigrams() const {
  int64_t total = 0;
  for (const auto& [t, c] : unigrams) total += c;
  return total;
}

int64_t GroupStatistics::total_skip_bigrams() const {
  int64_t total = 0;
  for (const auto& [p, c] : skip_bigrams) total += c;
  return total;
}

GroupStatistics extract_group_statistics(const std::vector<Sentence>& sentences,
                                         const std::string& label) {
  GroupStatistics stats;
  stats.label = label;
  stats.lengths.reserve(sentences.size());
  for (const auto& s : sentences) {
    const int n = static_cast<int>(s.size());
    stats.lengths.push_back(n);
    for (int i = 0; i < n; ++i) {
      stats.unigrams[s[i]] += 1;
      if (i + 1 < n) stats.bigrams[{s[i], s[i + 1]}] += 1;
      for (int j = i + 1; j < n; ++j) {
        stats.skip_bigrams[{s[i], s[j]}] += 1;
      }
    }
  }
  return stats;
}

MassCurve mass_curve(const ConditionalSequenceModel& model,
                     const Sentence& source, const SampleSet& samples) {
  MassCurve curve;
  curve.coverage.reserve(samples.samples.size());
  std::set<Sentence> seen;
  double total = 0.0;
  for (const auto& sample : samples.samples) {
    if (seen.insert(sample.sentence).second) {
      total += std::exp(model.sequence_log_prob(source, sample.sentence));
      curve.unique_count += 1;
    }
    curve.coverage.push_back(total);
  }
  return curve;
}

bool beam_in_samples(const Sentence& beam_output, const SampleSet& samples) {
  return samples.unique_index.count(beam_output) > 0;
}

EmptyStringStats empty_string_stats(const SampleSet& samples) {
  EmptyStringStats stats;
  auto it = samples.unique_index.find(Sentence{});
  if (it != samples.unique_index.end()) {
    stats.occurred = true;
    stats.count = it->second;
  }
  return stats;
}

double all_unique_rate(const std::vector<SampleSet>& sample_sets) {
  if (sample_sets.empty()) return 0.0;
  int all_unique = 0;
  for (const auto& set : sample_sets) {
    if (static_cast<int>(set.unique_index.size()) == set.size()) {
      all_unique += 1;
    }
  }
  return static_cast<double>(all_unique) / sample_sets.size();
}

}  // namespace seqdec
