#pragma once

#include <cstddef>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "topicforge/clustering.hpp"
#include "topicforge/corpus.hpp"
#include "topicforge/matrix.hpp"

namespace topicforge {

// Per-class term counts, each class being the concatenation of its documents.
// Outlier documents are counted separately and take no part in K, A or the
// per-term totals.
struct ClassTermMatrix {
  std::size_t K = 0;
  SparseMatrix tf;                 // K x V
  std::vector<double> tf_global;   // sum over classes, per term
  double average_class_words = 0;  // A
  std::vector<double> outlier_tf;  // V, counts over outlier documents
};

// K x V class-based weights.
struct TopicWordMatrix {
  SparseMatrix weights;
};

struct TermWeight {
  std::string term;
  double weight = 0.0;

  bool operator==(const TermWeight&) const = default;
};

using TopicWords = std::vector<std::vector<TermWeight>>;

struct CtfidfOptions {
  // Base of the logarithm in the inverse class frequency.
  double log_base = std::numbers::e;
};

struct TopicModel {
  ClusterAssignment assignment;
  Vocabulary vocab;
  ClassTermMatrix ctm;
  TopicWordMatrix twm;
  std::vector<std::size_t> topic_sizes;
  TopicWords top_words;
  std::size_t top_n = 10;
  CtfidfOptions options;

  std::size_t num_topics() const noexcept { return ctm.K; }
};

ClassTermMatrix aggregate_classes(const Corpus& corpus, const ClusterAssignment& assignment, const Vocabulary& vocab);

// log(1 + A / tf_t) per term; 0 for terms absent from every class.
std::vector<double> inverse_class_frequency(const ClassTermMatrix& ctm, const CtfidfOptions& options = {});

TopicWordMatrix ctfidf_transform(const ClassTermMatrix& ctm, const CtfidfOptions& options = {});

// Document x term weights tf(t, d) * ln(N / df_t).
SparseMatrix classic_tfidf(const Corpus& corpus, const Vocabulary& vocab);

// Highest-weight terms per row, descending; equal weights in lexicographic order.
TopicWords top_n_words(const TopicWordMatrix& twm, const Vocabulary& vocab, std::size_t n);

// Runs aggregation, weighting and top-n extraction for a finished clustering.
TopicModel build_topic_model(const Corpus& corpus, const ClusterAssignment& assignment, Vocabulary vocab,
                             std::size_t top_n = 10, const CtfidfOptions& options = {});

// Merges the smallest topic into its most cosine-similar topic until
// target_k topics remain, recomputing the weights after every merge.
TopicModel reduce_topics(const TopicModel& model, const Corpus& corpus, std::size_t target_k);

// One merge step; returns {merged-away topic, receiving topic} in the old ids.
std::pair<std::size_t, std::size_t> pick_merge(const TopicModel& model);

struct MmrResult {
  std::vector<TermWeight> words;
  bool reranked = false;
};

// Greedy maximal marginal relevance over the candidates: relevance is the
// term weight scaled to [0, 1], redundancy is the highest cosine similarity to
// an already chosen term. Falls back to the input order, with a warning, when
// a candidate has no vector.
MmrResult mmr_rerank(const std::vector<TermWeight>& candidates,
                     const std::map<std::string, std::vector<float>>& word_vectors, double lambda, std::size_t n);

// Term vectors as the mean embedding of the documents containing each term.
std::map<std::string, std::vector<float>> term_vectors_from_documents(const DenseMatrix<float>& embeddings,
                                                                      const Corpus& corpus,
                                                                      const std::vector<std::string>& terms);

}  // namespace topicforge
