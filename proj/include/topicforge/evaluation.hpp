#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "topicforge/corpus.hpp"
#include "topicforge/ctfidf.hpp"
#include "topicforge/pipeline.hpp"

namespace topicforge {

using WordLists = std::vector<std::vector<std::string>>;

WordLists word_lists(const TopicWords& topics);

inline constexpr double kNpmiEpsilon = 1e-12;

// ln(P(a,b) / (P(a) P(b))) / -ln P(a,b), with epsilon added to P(a,b) inside
// both logarithms. Pairs present in every window score 1.
double npmi(double p_a, double p_b, double p_ab);

// Boolean co-occurrence over sliding windows of `window` tokens; documents no
// longer than the window form a single window.
class CooccurrenceCounts {
 public:
  CooccurrenceCounts(const Corpus& reference, const std::vector<std::string>& words, std::size_t window);

  std::size_t num_windows() const noexcept { return windows_; }
  bool known(const std::string& w) const;
  double probability(const std::string& w) const;
  double joint_probability(const std::string& a, const std::string& b) const;

 private:
  std::size_t id_of(const std::string& w) const;

  std::vector<std::string> words_;
  std::vector<std::size_t> single_;
  std::vector<std::size_t> pair_;  // upper triangle, words_.size()^2 layout
  std::size_t windows_ = 0;
};

struct CoherenceResult {
  double score = 0.0;
  // NaN for topics with fewer than two words.
  std::vector<double> per_topic;
  std::size_t oov_words = 0;
};

// Mean over topics of the average NPMI of all word pairs among each topic's
// first top_n words. Words missing from the reference score -1 with every
// partner.
CoherenceResult npmi_coherence(const WordLists& topics, const Corpus& reference, std::size_t top_n = 10,
                               std::size_t window = 10);

// Unique words over total words among each topic's first top_n words.
double topic_diversity(const WordLists& topics, std::size_t top_n = 25);

struct EvalCell {
  std::string config;
  std::size_t topic_count = 0;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> timestep;
  double tc = 0.0;
  double td = 0.0;
  double wall_seconds = 0.0;
  std::size_t fitted_topics = 0;
  bool ok = true;
  std::string error;
};

struct EvalAggregate {
  std::string config;
  std::size_t topic_count = 0;
  std::size_t cells = 0;
  double tc = 0.0;
  double td = 0.0;
  double wall_seconds = 0.0;
};

struct EvalReport {
  std::vector<EvalCell> cells;
  std::vector<EvalAggregate> per_topic_count;
  EvalAggregate overall;
  std::size_t failed_cells = 0;

  // Recomputes the aggregates from the successful cells.
  void aggregate();
};

struct BenchmarkOptions {
  std::string config_name = "topicforge";
  std::vector<std::size_t> topic_counts{10, 20, 30, 40, 50};
  std::size_t runs = 3;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::size_t coherence_top_n = 10;
  std::size_t diversity_top_n = 25;
  std::size_t window = 10;
};

// Fits the pipeline once per (topic count, run), reduces to the topic count
// and scores the topics; wall time covers the whole fit.
EvalReport run_benchmark(const Corpus& raw, const PipelineConfig& base, const BenchmarkOptions& options);

struct DynamicBenchmarkOptions {
  std::string config_name = "topicforge-dtm";
  std::size_t topic_count = 50;
  std::size_t bins = 9;
  bool evolve = false;
  std::size_t runs = 3;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::size_t coherence_top_n = 10;
  std::size_t diversity_top_n = 25;
  std::size_t window = 10;
};

// One cell per (run, timestep) scored on that timestep's topic words; the
// overall mean averages all of them.
EvalReport run_dynamic_benchmark(const Corpus& raw, const PipelineConfig& base, const DynamicBenchmarkOptions& options);

// config,topic_count,run,tc,td,wall_seconds
std::string report_csv(const EvalReport& report);
std::string report_table(const EvalReport& report);

}  // namespace topicforge
