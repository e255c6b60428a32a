#include "topicforge/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <unordered_map>

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

namespace topicforge {

using nlohmann::json;

void PipelineConfig::validate() const {
  if (embeddings_path && fallback_dim)
    throw ValidationError("both --embeddings and --fallback-dim are set; choose one embedding source");
  if (!embeddings_path && !fallback_dim)
    throw ValidationError("no embedding source: pass --embeddings <file> or --fallback-dim <d> with --seed <s>");
  if (fallback_dim && *fallback_dim < 2) throw ValidationError("--fallback-dim must be at least 2");
  if (preprocess.min_doc_tokens < 1) throw ValidationError("min_doc_tokens must be at least 1");
  if (preprocess.min_df < 1) throw ValidationError("min_df must be at least 1");
  reducer_params.validate();
  if (clusterer == ClustererKind::hdbscan) hdbscan.validate();
  if (clusterer == ClustererKind::kmeans && kmeans_k < 1) throw ValidationError("kmeans k must be at least 1");
  if (top_n < 1) throw ValidationError("top_n must be at least 1");
  if (nr_topics && *nr_topics < 1) throw ValidationError("nr_topics must be at least 1");
  if (mmr_lambda && (*mmr_lambda < 0.0 || *mmr_lambda > 1.0))
    throw ValidationError("mmr lambda must lie in [0, 1]");
}

json PipelineConfig::to_json() const {
  std::vector<std::string> stop(preprocess.stopwords.begin(), preprocess.stopwords.end());
  std::sort(stop.begin(), stop.end());
  json j;
  j["preprocess"] = {{"lowercase", preprocess.lowercase},
                     {"strip_punctuation", preprocess.strip_punctuation},
                     {"remove_stopwords", preprocess.remove_stopwords},
                     {"min_doc_tokens", preprocess.min_doc_tokens},
                     {"min_df", preprocess.min_df},
                     {"stopwords", stop}};
  j["stopwords_path"] = stopwords_path ? json(stopwords_path->string()) : json(nullptr);
  j["embeddings_path"] = embeddings_path ? json(embeddings_path->string()) : json(nullptr);
  j["fallback_dim"] = fallback_dim ? json(*fallback_dim) : json(nullptr);
  j["reducer"] = reducer == ReductionMethod::umap ? "umap" : "pca";
  j["reducer_params"] = {{"n_neighbors", reducer_params.n_neighbors},
                         {"min_dist", reducer_params.min_dist},
                         {"out_dim", reducer_params.out_dim},
                         {"epochs", reducer_params.epochs},
                         {"curve_a", reducer_params.curve_a},
                         {"curve_b", reducer_params.curve_b},
                         {"negative_sample_rate", reducer_params.negative_sample_rate},
                         {"learning_rate", reducer_params.learning_rate},
                         {"unique_rows", reducer_params.unique_rows}};
  j["clusterer"] = clusterer == ClustererKind::hdbscan ? "hdbscan" : "kmeans";
  j["hdbscan"] = {{"min_cluster_size", hdbscan.min_cluster_size},
                  {"min_samples", hdbscan.min_samples ? json(*hdbscan.min_samples) : json(nullptr)}};
  j["kmeans_k"] = kmeans_k;
  j["top_n"] = top_n;
  j["nr_topics"] = nr_topics ? json(*nr_topics) : json(nullptr);
  j["mmr_lambda"] = mmr_lambda ? json(*mmr_lambda) : json(nullptr);
  j["seed"] = seed;
  return j;
}

namespace {

template <typename T>
void read_opt(const json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
  } else {
    out = j.at(key).get<T>();
  }
}

template <typename T>
void read_val(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_path(const json& j, const char* key, std::optional<std::filesystem::path>& out) {
  std::optional<std::string> s;
  read_opt(j, key, s);
  if (s) {
    out = *s;
  } else if (j.contains(key)) {
    out.reset();
  }
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j) {
  PipelineConfig c;
  try {
    if (j.contains("preprocess")) {
      const auto& p = j.at("preprocess");
      read_val(p, "lowercase", c.preprocess.lowercase);
      read_val(p, "strip_punctuation", c.preprocess.strip_punctuation);
      read_val(p, "remove_stopwords", c.preprocess.remove_stopwords);
      read_val(p, "min_doc_tokens", c.preprocess.min_doc_tokens);
      read_val(p, "min_df", c.preprocess.min_df);
      if (p.contains("stopwords")) {
        auto words = p.at("stopwords").get<std::vector<std::string>>();
        c.preprocess.stopwords = {words.begin(), words.end()};
      }
    }
    read_path(j, "stopwords_path", c.stopwords_path);
    read_path(j, "embeddings_path", c.embeddings_path);
    read_opt(j, "fallback_dim", c.fallback_dim);
    if (j.contains("reducer")) {
      const auto r = j.at("reducer").get<std::string>();
      if (r == "umap") {
        c.reducer = ReductionMethod::umap;
      } else if (r == "pca") {
        c.reducer = ReductionMethod::pca;
      } else {
        throw ValidationError("unknown reducer '" + r + "' (expected umap or pca)");
      }
    }
    if (j.contains("reducer_params")) {
      const auto& r = j.at("reducer_params");
      auto& rp = c.reducer_params;
      read_val(r, "n_neighbors", rp.n_neighbors);
      read_val(r, "min_dist", rp.min_dist);
      read_val(r, "out_dim", rp.out_dim);
      read_val(r, "epochs", rp.epochs);
      read_val(r, "curve_a", rp.curve_a);
      read_val(r, "curve_b", rp.curve_b);
      read_val(r, "negative_sample_rate", rp.negative_sample_rate);
      read_val(r, "learning_rate", rp.learning_rate);
      read_val(r, "unique_rows", rp.unique_rows);
    }
    if (j.contains("clusterer")) {
      const auto k = j.at("clusterer").get<std::string>();
      if (k == "hdbscan") {
        c.clusterer = ClustererKind::hdbscan;
      } else if (k == "kmeans") {
        c.clusterer = ClustererKind::kmeans;
      } else {
        throw ValidationError("unknown clusterer '" + k + "' (expected hdbscan or kmeans)");
      }
    }
    if (j.contains("hdbscan")) {
      read_val(j.at("hdbscan"), "min_cluster_size", c.hdbscan.min_cluster_size);
      read_opt(j.at("hdbscan"), "min_samples", c.hdbscan.min_samples);
    }
    read_val(j, "kmeans_k", c.kmeans_k);
    read_val(j, "top_n", c.top_n);
    read_opt(j, "nr_topics", c.nr_topics);
    read_opt(j, "mmr_lambda", c.mmr_lambda);
    read_val(j, "seed", c.seed);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad config: ") + e.what());
  }
  c.reducer_params.seed = c.seed;
  return c;
}

StageError::StageError(ErrorKind kind, std::string stage, const std::string& what, const std::string& hint)
    : Error(kind, stage + " stage failed: " + what + (hint.empty() ? "" : " (hint: " + hint + ")")),
      stage_(std::move(stage)) {}

Corpus preprocess_for(const PipelineConfig& config, const Corpus& raw) {
  PreprocessOptions opts = config.preprocess;
  if (config.stopwords_path) opts.stopwords = load_stopwords(*config.stopwords_path);
  return preprocess(raw, opts);
}

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
auto run_stage(const char* stage, const std::string& hint, double& seconds, F&& body) {
  const auto start = Clock::now();
  try {
    auto out = body();
    seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return out;
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(e.kind(), stage, e.what(), hint);
  } catch (const std::exception& e) {
    throw StageError(ErrorKind::pipeline, stage, e.what(), hint);
  }
}

// Accepts rows for either the raw or the preprocessed corpus.
EmbeddingMatrix load_external(const std::filesystem::path& path, const Corpus& raw, const Corpus& kept) {
  if (read_embeddings(path).rows() == kept.size() && kept.size() != raw.size()) return read_embeddings(path, kept);
  EmbeddingMatrix all = read_embeddings(path, raw);
  if (kept.size() == raw.size()) return all;
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < all.doc_ids.size(); ++i) row_of.emplace(all.doc_ids[i], i);
  EmbeddingMatrix out;
  out.provenance = all.provenance;
  out.values = DenseMatrix<float>(kept.size(), all.dim());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const std::size_t src = row_of.at(kept[i].id);
    std::copy_n(all.values.row(src).begin(), all.dim(), out.values.row(i).begin());
    out.doc_ids.push_back(kept[i].id);
  }
  return out;
}

}  // namespace

PipelineResult fit_pipeline(const PipelineConfig& config, const Corpus& raw) {
  config.validate();
  const auto start = Clock::now();
  PipelineResult r;
  r.config = config;
  r.config.reducer_params.seed = config.seed;

  Vocabulary vocab;
  const std::string preprocess_hint =
      config.stopwords_path ? "check the --stopwords file and --min-doc-tokens" : "lower --min-doc-tokens";
  r.corpus = run_stage("preprocess", preprocess_hint, r.timings.preprocess, [&] {
    Corpus c = preprocess_for(config, raw);
    if (c.empty())
      throw ValidationError("no documents left after preprocessing (min_doc_tokens=" +
                            std::to_string(config.preprocess.min_doc_tokens) + ")");
    vocab = build_vocabulary(c, config.preprocess.min_df);
    return c;
  });

  r.embeddings = run_stage("embeddings", "pass --embeddings <file> exported for this corpus, or --fallback-dim <d>",
                           r.timings.embed, [&] {
                             if (config.embeddings_path) return load_external(*config.embeddings_path, raw, r.corpus);
                             return fallback_embed(r.corpus, vocab, *config.fallback_dim, config.seed);
                           });

  r.reduced = run_stage("reduction", "lower --n-neighbors or use --reducer pca", r.timings.reduce, [&] {
    if (config.reducer == ReductionMethod::pca) return pca_reduce(r.embeddings, config.reducer_params.out_dim);
    return umap_reduce(r.embeddings, r.config.reducer_params);
  });

  const std::string clustering_hint = config.clusterer == ClustererKind::kmeans
                                          ? "choose --k no larger than the number of documents"
                                          : "lower --min-cluster-size or switch to --clusterer kmeans";
  const ClusterAssignment assignment =
      run_stage("clustering", clustering_hint, r.timings.cluster, [&] {
        if (config.clusterer == ClustererKind::kmeans) return kmeans_fit(r.reduced, config.kmeans_k, config.seed).assignment;
        r.hdbscan = hdbscan_fit(r.reduced, config.hdbscan);
        return r.hdbscan->assignment;
      });

  r.model = run_stage("topics", "lower --min-cluster-size so that at least one topic forms", r.timings.represent, [&] {
    TopicModel m = build_topic_model(r.corpus, assignment, vocab, config.top_n);
    if (config.nr_topics) {
      if (*config.nr_topics < m.num_topics()) {
        m = reduce_topics(m, r.corpus, *config.nr_topics);
      } else if (*config.nr_topics > m.num_topics()) {
        spdlog::warn("nr_topics={} exceeds the {} fitted topics; keeping all of them", *config.nr_topics,
                     m.num_topics());
      }
    }
    if (config.mmr_lambda) apply_mmr(m, r.corpus, r.embeddings, *config.mmr_lambda);
    return m;
  });

  r.timings.total = std::chrono::duration<double>(Clock::now() - start).count();
  return r;
}

void apply_mmr(TopicModel& model, const Corpus& corpus, const EmbeddingMatrix& embeddings, double lambda) {
  const std::size_t pool = model.top_n * 3;
  const TopicWords candidates = top_n_words(model.twm, model.vocab, pool);
  std::vector<std::string> terms;
  for (const auto& topic : candidates)
    for (const auto& tw : topic) terms.push_back(tw.term);
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  const auto vectors = term_vectors_from_documents(embeddings.values, corpus, terms);
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    model.top_words[k] = mmr_rerank(candidates[k], vectors, lambda, model.top_n).words;
  }
}

json topics_to_json(const TopicModel& model) {
  json out = json::array();
  out.push_back({{"topic_id", -1}, {"size", model.assignment.outlier_count()}, {"top_words", json::array()}});
  for (std::size_t k = 0; k < model.num_topics(); ++k) {
    json words = json::array();
    for (const auto& tw : model.top_words[k]) words.push_back({{"term", tw.term}, {"weight", tw.weight}});
    out.push_back({{"topic_id", k}, {"size", model.topic_sizes[k]}, {"top_words", std::move(words)}});
  }
  return out;
}

json dtm_to_json(const TopicModel& model, const TimeBinning& binning, const std::vector<TimestepRepresentation>& reps,
                 bool evolve) {
  json steps = json::array();
  for (const auto& rep : reps) {
    const TopicWords words = top_n_words(rep.matrix, model.vocab, model.top_n);
    json topics = json::array();
    for (std::size_t k = 0; k < words.size(); ++k) {
      if (words[k].empty()) continue;
      json list = json::array();
      for (const auto& tw : words[k]) list.push_back({{"term", tw.term}, {"weight", tw.weight}});
      topics.push_back({{"topic_id", k}, {"top_words", std::move(list)}});
    }
    steps.push_back({{"timestep", rep.timestep},
                     {"label", binning.bin_labels.at(rep.timestep)},
                     {"doc_count", rep.doc_count},
                     {"topics", std::move(topics)}});
  }
  return {{"bins",
           {{"num_bins", binning.num_bins},
            {"edges", binning.bin_edges},
            {"labels", binning.bin_labels},
            {"counts", binning.bin_counts()}}},
          {"evolve", evolve},
          {"timesteps", std::move(steps)}};
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("sha256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string corpus_fingerprint(const Corpus& corpus) {
  std::string buf;
  for (const auto& doc : corpus.documents()) {
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
      if (i > 0) buf.push_back('\x1f');
      buf += doc.tokens[i];
    }
    buf.push_back('\x1e');
  }
  return sha256_hex(buf);
}

}  // namespace topicforge
