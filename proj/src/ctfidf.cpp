#include "topicforge/ctfidf.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "topicforge/errors.hpp"

namespace topicforge {

namespace {

std::unordered_map<std::size_t, std::size_t> count_terms(const Document& doc, const Vocabulary& vocab) {
  std::unordered_map<std::size_t, std::size_t> counts;
  for (std::size_t t : vocab.encode(doc.tokens)) ++counts[t];
  return counts;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

ClassTermMatrix aggregate_classes(const Corpus& corpus, const ClusterAssignment& assignment, const Vocabulary& vocab) {
  if (assignment.size() != corpus.size())
    throw ValidationError("assignment has " + std::to_string(assignment.size()) + " labels for " +
                          std::to_string(corpus.size()) + " documents");
  if (assignment.K == 0) throw PipelineError("no topics found: every document is an outlier");

  ClassTermMatrix ctm;
  ctm.K = assignment.K;
  ctm.tf_global.assign(vocab.size(), 0.0);
  ctm.outlier_tf.assign(vocab.size(), 0.0);
  std::vector<Triplet> entries;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const int label = assignment.labels[d];
    for (std::size_t t : vocab.encode(corpus[d].tokens)) {
      if (label == kOutlierLabel) {
        ctm.outlier_tf[t] += 1.0;
      } else {
        entries.push_back({static_cast<std::uint32_t>(label), static_cast<std::uint32_t>(t), 1.0});
        ctm.tf_global[t] += 1.0;
      }
    }
  }
  const double total = static_cast<double>(entries.size());
  ctm.tf = SparseMatrix::from_triplets(ctm.K, vocab.size(), std::move(entries));
  if (total == 0.0) throw PipelineError("no topics found: clustered documents contain no vocabulary terms");
  ctm.average_class_words = total / static_cast<double>(ctm.K);
  return ctm;
}

std::vector<double> inverse_class_frequency(const ClassTermMatrix& ctm, const CtfidfOptions& options) {
  if (!(options.log_base > 0.0) || options.log_base == 1.0) throw ValidationError("invalid logarithm base");
  const bool natural = options.log_base == std::numbers::e;
  const double scale = natural ? 1.0 : std::log(options.log_base);
  std::vector<double> icf(ctm.tf_global.size(), 0.0);
  for (std::size_t t = 0; t < icf.size(); ++t) {
    if (ctm.tf_global[t] <= 0.0) continue;
    const double v = std::log(1.0 + ctm.average_class_words / ctm.tf_global[t]);
    icf[t] = natural ? v : v / scale;
  }
  return icf;
}

TopicWordMatrix ctfidf_transform(const ClassTermMatrix& ctm, const CtfidfOptions& options) {
  const std::vector<double> icf = inverse_class_frequency(ctm, options);
  TopicWordMatrix twm{ctm.tf};
  for (std::size_t c = 0; c < ctm.K; ++c) {
    auto idx = twm.weights.row_indices(c);
    auto val = twm.weights.row_values(c);
    for (std::size_t k = 0; k < idx.size(); ++k) val[k] = val[k] * icf[idx[k]];
  }
  return twm;
}

SparseMatrix classic_tfidf(const Corpus& corpus, const Vocabulary& vocab) {
  const double n = static_cast<double>(corpus.size());
  std::vector<Triplet> entries;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    for (const auto& [t, count] : count_terms(corpus[d], vocab)) {
      const double idf = std::log(n / static_cast<double>(vocab.document_frequency(t)));
      entries.push_back({static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(t),
                         static_cast<double>(count) * idf});
    }
  }
  return SparseMatrix::from_triplets(corpus.size(), vocab.size(), std::move(entries));
}

TopicWords top_n_words(const TopicWordMatrix& twm, const Vocabulary& vocab, std::size_t n) {
  if (n < 1) throw ValidationError("top_n must be at least 1");
  if (twm.weights.cols() != vocab.size()) throw ValidationError("topic-word matrix does not match the vocabulary");
  TopicWords out(twm.weights.rows());
  std::vector<std::pair<double, std::uint32_t>> scored;
  for (std::size_t c = 0; c < twm.weights.rows(); ++c) {
    auto idx = twm.weights.row_indices(c);
    auto val = twm.weights.row_values(c);
    scored.clear();
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (val[k] > 0.0) scored.emplace_back(val[k], idx[k]);
    }
    const std::size_t take = std::min(n, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
    out[c].reserve(take);
    for (std::size_t k = 0; k < take; ++k) out[c].push_back({vocab.term(scored[k].second), scored[k].first});
  }
  return out;
}

TopicModel build_topic_model(const Corpus& corpus, const ClusterAssignment& assignment, Vocabulary vocab,
                             std::size_t top_n, const CtfidfOptions& options) {
  TopicModel model;
  model.assignment = assignment;
  model.vocab = std::move(vocab);
  model.top_n = top_n;
  model.options = options;
  model.ctm = aggregate_classes(corpus, model.assignment, model.vocab);
  model.twm = ctfidf_transform(model.ctm, options);
  model.topic_sizes = model.assignment.cluster_sizes;
  model.top_words = top_n_words(model.twm, model.vocab, top_n);
  return model;
}

std::pair<std::size_t, std::size_t> pick_merge(const TopicModel& model) {
  const std::size_t k = model.num_topics();
  if (k < 2) throw ValidationError("cannot merge topics when fewer than two exist");
  std::size_t smallest = 0;
  for (std::size_t c = 1; c < k; ++c) {
    if (model.topic_sizes[c] < model.topic_sizes[smallest]) smallest = c;
  }
  std::size_t best = smallest == 0 ? 1 : 0;
  double best_sim = -2.0;
  for (std::size_t c = 0; c < k; ++c) {
    if (c == smallest) continue;
    const double sim = sparse_cosine(model.twm.weights, smallest, model.twm.weights, c);
    if (sim > best_sim) {
      best_sim = sim;
      best = c;
    }
  }
  return {smallest, best};
}

TopicModel reduce_topics(const TopicModel& model, const Corpus& corpus, std::size_t target_k) {
  if (target_k < 1) throw ValidationError("target topic count must be at least 1");
  if (target_k > model.num_topics())
    throw ValidationError("cannot reduce " + std::to_string(model.num_topics()) + " topics to " +
                          std::to_string(target_k));
  TopicModel current = model;
  while (current.num_topics() > target_k) {
    const auto [from, into] = pick_merge(current);
    std::vector<int> labels = current.assignment.labels;
    const int src = static_cast<int>(from);
    const int dst = static_cast<int>(into);
    for (int& l : labels) {
      if (l == src) l = dst;
      if (l > src) --l;
    }
    auto assignment = ClusterAssignment::from_labels(std::move(labels), current.assignment.probabilities);
    current = build_topic_model(corpus, assignment, std::move(current.vocab), current.top_n, current.options);
  }
  return current;
}

MmrResult mmr_rerank(const std::vector<TermWeight>& candidates,
                     const std::map<std::string, std::vector<float>>& word_vectors, double lambda, std::size_t n) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("MMR lambda must lie in [0, 1]");
  const std::size_t take = std::min(n, candidates.size());
  MmrResult result;
  std::vector<const std::vector<float>*> vectors;
  for (const auto& c : candidates) {
    auto it = word_vectors.find(c.term);
    if (it == word_vectors.end()) {
      spdlog::warn("no vector for term '{}'; keeping relevance order", c.term);
      result.words.assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take));
      return result;
    }
    vectors.push_back(&it->second);
  }
  double max_weight = 0.0;
  for (const auto& c : candidates) max_weight = std::max(max_weight, c.weight);
  std::vector<double> relevance;
  for (const auto& c : candidates) relevance.push_back(max_weight > 0.0 ? c.weight / max_weight : 0.0);

  std::vector<bool> chosen(candidates.size(), false);
  std::vector<double> redundancy(candidates.size(), 0.0);
  for (std::size_t step = 0; step < take; ++step) {
    std::size_t best = candidates.size();
    double best_score = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (chosen[i]) continue;
      const double score = step == 0 ? relevance[i] : lambda * relevance[i] - (1.0 - lambda) * redundancy[i];
      if (best == candidates.size() || score > best_score ||
          (score == best_score && relevance[i] > relevance[best])) {
        best = i;
        best_score = score;
      }
    }
    chosen[best] = true;
    result.words.push_back(candidates[best]);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (!chosen[i]) redundancy[i] = std::max(redundancy[i], cosine(*vectors[i], *vectors[best]));
    }
  }
  result.reranked = true;
  return result;
}

std::map<std::string, std::vector<float>> term_vectors_from_documents(const DenseMatrix<float>& embeddings,
                                                                      const Corpus& corpus,
                                                                      const std::vector<std::string>& terms) {
  if (embeddings.rows() != corpus.size()) throw ValidationError("embedding rows do not match the corpus");
  std::unordered_map<std::string, std::size_t> wanted;
  for (std::size_t i = 0; i < terms.size(); ++i) wanted.emplace(terms[i], i);
  std::vector<std::vector<double>> sums(terms.size());
  std::vector<std::size_t> counts(terms.size(), 0);
  std::unordered_set<std::size_t> in_doc;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    in_doc.clear();
    for (const auto& tok : corpus[d].tokens) {
      auto it = wanted.find(tok);
      if (it != wanted.end()) in_doc.insert(it->second);
    }
    for (std::size_t t : in_doc) {
      if (sums[t].empty()) sums[t].assign(embeddings.cols(), 0.0);
      auto row = embeddings.row(d);
      for (std::size_t j = 0; j < row.size(); ++j) sums[t][j] += row[j];
      ++counts[t];
    }
  }
  std::map<std::string, std::vector<float>> out;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    if (counts[t] == 0) continue;
    std::vector<float> v(embeddings.cols());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = static_cast<float>(sums[t][j] / static_cast<double>(counts[t]));
    out.emplace(terms[t], std::move(v));
  }
  return out;
}

}  // namespace topicforge
