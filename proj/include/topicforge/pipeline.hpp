#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "topicforge/clustering.hpp"
#include "topicforge/corpus.hpp"
#include "topicforge/ctfidf.hpp"
#include "topicforge/dynamic.hpp"
#include "topicforge/embeddings.hpp"
#include "topicforge/errors.hpp"
#include "topicforge/reduction.hpp"

namespace topicforge {

enum class ClustererKind { hdbscan, kmeans };

// Every parameter of a run. The resolved config plus the inputs determine all
// outputs.
struct PipelineConfig {
  PreprocessOptions preprocess;
  std::optional<std::filesystem::path> stopwords_path;

  std::optional<std::filesystem::path> embeddings_path;
  std::optional<std::size_t> fallback_dim;

  ReductionMethod reducer = ReductionMethod::umap;
  ReducerParams reducer_params;

  ClustererKind clusterer = ClustererKind::hdbscan;
  HdbscanParams hdbscan;
  std::size_t kmeans_k = 20;

  std::size_t top_n = 10;
  std::optional<std::size_t> nr_topics;
  std::optional<double> mmr_lambda;

  std::uint64_t seed = 42;

  // Checks the parameter sets and that exactly one embedding source is set.
  void validate() const;

  nlohmann::json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& j);
};

// A failure inside one pipeline stage, keeping the original error class.
class StageError : public Error {
 public:
  StageError(ErrorKind kind, std::string stage, const std::string& what, const std::string& hint);

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct StageTimings {
  double preprocess = 0.0;
  double embed = 0.0;
  double reduce = 0.0;
  double cluster = 0.0;
  double represent = 0.0;
  double total = 0.0;
};

struct PipelineResult {
  PipelineConfig config;
  Corpus corpus;  // preprocessed
  EmbeddingMatrix embeddings;
  ReducedEmbedding reduced;
  std::optional<HdbscanResult> hdbscan;
  TopicModel model;
  StageTimings timings;
};

// Preprocesses the raw corpus with the config's options, loading the stopword
// file when one is configured.
Corpus preprocess_for(const PipelineConfig& config, const Corpus& raw);

// corpus -> embeddings -> reduction -> clustering -> class-based topic words.
PipelineResult fit_pipeline(const PipelineConfig& config, const Corpus& raw);

// Applies the configured MMR re-ranking to every topic's word list.
void apply_mmr(TopicModel& model, const Corpus& corpus, const EmbeddingMatrix& embeddings, double lambda);

// Serialized topics: [{topic_id, size, top_words: [{term, weight}]}], the
// outlier bucket first with topic_id -1.
nlohmann::json topics_to_json(const TopicModel& model);

// Per-timestep topic words plus the binning metadata.
nlohmann::json dtm_to_json(const TopicModel& model, const TimeBinning& binning,
                           const std::vector<TimestepRepresentation>& reps, bool evolve);

std::string sha256_hex(std::string_view bytes);

// Content hash of the token streams of a preprocessed corpus.
std::string corpus_fingerprint(const Corpus& corpus);

}  // namespace topicforge
