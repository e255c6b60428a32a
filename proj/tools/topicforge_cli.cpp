#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "topicforge/corpus.hpp"
#include "topicforge/dynamic.hpp"
#include "topicforge/embeddings.hpp"
#include "topicforge/evaluation.hpp"
#include "topicforge/file_io.hpp"
#include "topicforge/persistence.hpp"
#include "topicforge/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace topicforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitPipeline = 3;
constexpr int kExitIo = 4;

// Raw flag values; unset optionals leave the config file / defaults alone.
struct Flags {
  std::optional<fs::path> config_json;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> stopwords;
  std::optional<std::size_t> min_doc_tokens, min_df;
  std::optional<fs::path> embeddings;
  std::optional<std::size_t> fallback_dim;
  std::optional<std::string> reducer;
  std::optional<std::size_t> n_neighbors, out_dim, epochs;
  std::optional<double> min_dist;
  std::optional<std::string> clusterer;
  std::optional<std::size_t> min_cluster_size, min_samples, k;
  std::optional<std::size_t> top_n, nr_topics;
  std::optional<double> mmr_lambda;
};

void add_pipeline_flags(CLI::App& app, Flags& f) {
  app.add_option("--config-json", f.config_json, "Resolved config JSON from an earlier run");
  app.add_option("--seed", f.seed, "Global seed for every stochastic stage");
  app.add_option("--stopwords", f.stopwords, "Stopword file, one word per line");
  app.add_option("--min-doc-tokens", f.min_doc_tokens, "Drop documents with fewer tokens");
  app.add_option("--min-df", f.min_df, "Minimum document frequency of a vocabulary term");
  app.add_option("--embeddings", f.embeddings, "TPFG embedding file");
  app.add_option("--fallback-dim", f.fallback_dim, "Use the TF-IDF projection embedder with this dimension");
  app.add_option("--reducer", f.reducer, "umap or pca")->check(CLI::IsMember({"umap", "pca"}));
  app.add_option("--n-neighbors", f.n_neighbors, "UMAP neighborhood size");
  app.add_option("--min-dist", f.min_dist, "UMAP min_dist");
  app.add_option("--out-dim", f.out_dim, "Reduced dimensionality");
  app.add_option("--epochs", f.epochs, "UMAP optimization epochs");
  app.add_option("--clusterer", f.clusterer, "hdbscan or kmeans")->check(CLI::IsMember({"hdbscan", "kmeans"}));
  app.add_option("--min-cluster-size", f.min_cluster_size, "HDBSCAN minimum cluster size");
  app.add_option("--min-samples", f.min_samples, "HDBSCAN min_samples");
  app.add_option("--k", f.k, "k-means cluster count");
  app.add_option("--top-n", f.top_n, "Words per topic");
  app.add_option("--nr-topics", f.nr_topics, "Merge topics down to this count");
  app.add_option("--mmr-lambda", f.mmr_lambda, "Re-rank topic words with MMR");
}

PipelineConfig resolve_config(const Flags& f) {
  PipelineConfig c;
  if (f.config_json) {
    try {
      c = PipelineConfig::from_json(json::parse(read_file(*f.config_json)));
    } catch (const json::exception& e) {
      throw ValidationError("cannot parse " + f.config_json->string() + ": " + e.what());
    }
  }
  if (f.seed) c.seed = *f.seed;
  if (f.stopwords) c.stopwords_path = *f.stopwords;
  if (f.min_doc_tokens) c.preprocess.min_doc_tokens = *f.min_doc_tokens;
  if (f.min_df) c.preprocess.min_df = *f.min_df;
  if (f.embeddings) {
    c.embeddings_path = *f.embeddings;
    if (!f.fallback_dim) c.fallback_dim.reset();
  }
  if (f.fallback_dim) {
    c.fallback_dim = *f.fallback_dim;
    if (!f.embeddings) c.embeddings_path.reset();
  }
  if (f.reducer) c.reducer = *f.reducer == "pca" ? ReductionMethod::pca : ReductionMethod::umap;
  if (f.n_neighbors) c.reducer_params.n_neighbors = *f.n_neighbors;
  if (f.min_dist) c.reducer_params.min_dist = *f.min_dist;
  if (f.out_dim) c.reducer_params.out_dim = *f.out_dim;
  if (f.epochs) c.reducer_params.epochs = *f.epochs;
  if (f.clusterer) c.clusterer = *f.clusterer == "kmeans" ? ClustererKind::kmeans : ClustererKind::hdbscan;
  if (f.min_cluster_size) c.hdbscan.min_cluster_size = *f.min_cluster_size;
  if (f.min_samples) c.hdbscan.min_samples = *f.min_samples;
  if (f.k) c.kmeans_k = *f.k;
  if (f.top_n) c.top_n = *f.top_n;
  if (f.nr_topics) c.nr_topics = *f.nr_topics;
  if (f.mmr_lambda) c.mmr_lambda = *f.mmr_lambda;
  c.reducer_params.seed = c.seed;
  return c;
}

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::string file_sha(const fs::path& path) { return sha256_hex(read_file(path)); }

struct DtmFlags {
  std::optional<std::size_t> bins;
  std::optional<std::string> group_by;
  bool evolve = false;
};

void add_dtm_flags(CLI::App& app, DtmFlags& d, const char* bins_flag) {
  app.add_option(bins_flag, d.bins, "Number of equal-width timestamp bins");
  app.add_option("--group-by", d.group_by, "Bin by a metadata field instead of timestamps");
  app.add_flag("--evolve", d.evolve, "Smooth each timestep with the previous one");
}

bool dtm_requested(const DtmFlags& d) { return d.bins.has_value() || d.group_by.has_value(); }

json run_dtm(const TopicModel& model, const Corpus& corpus, const DtmFlags& d) {
  if (d.bins && d.group_by) throw ValidationError("pass either a bin count or --group-by, not both");
  const TimeBinning binning = d.group_by ? bin_by_field(corpus, *d.group_by) : bin_timestamps(corpus, *d.bins);
  auto reps = topics_over_time(model, corpus, binning);
  if (d.evolve) reps = smooth_representations(reps);
  return dtm_to_json(model, binning, reps, d.evolve);
}

// Model archive plus the corpus it was fitted on, preprocessed the same way.
struct Restored {
  LoadedModel loaded;
  PipelineConfig config;
  Corpus corpus;
};

Restored restore(const fs::path& model_dir, const fs::path& corpus_path, bool force) {
  const json manifest = json::parse(read_file(model_dir / "manifest.json"), nullptr, false);
  if (manifest.is_discarded() || !manifest.contains("config"))
    throw IntegrityError("manifest in " + model_dir.string() + " is unreadable");
  Restored r;
  r.config = PipelineConfig::from_json(manifest.at("config"));
  r.corpus = preprocess_for(r.config, load_jsonl(corpus_path));
  r.loaded = load_model(model_dir, r.corpus, force);
  return r;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation:
      return kExitValidation;
    case ErrorKind::pipeline:
      return kExitPipeline;
    case ErrorKind::io:
      return kExitIo;
  }
  return kExitPipeline;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("topicforge"));
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"topicforge: embedding-based topic modeling"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; flags override it");
  app.fallthrough();

  Flags flags;
  fs::path out_dir = ".";
  std::optional<fs::path> report;
  bool quiet = false;
  fs::path corpus_path;
  add_pipeline_flags(app, flags);
  app.add_option("--out-dir", out_dir, "Directory for output files");
  app.add_option("--report", report, "Write a run report (timings, benchmark CSV) to this path");
  app.add_flag("--quiet", quiet, "Only log errors");
  app.add_option("--corpus", corpus_path, "Corpus JSONL");

  fs::path model_dir;
  bool force = false;

  auto* fit = app.add_subcommand("fit", "Fit the full pipeline and write topics, model archive and run manifest");
  DtmFlags fit_dtm;
  add_dtm_flags(*fit, fit_dtm, "--dtm");

  auto* topics = app.add_subcommand("topics", "Print the topics of a saved model");
  topics->add_option("--model", model_dir, "Model archive directory")->required();
  topics->add_flag("--force", force, "Load even if the corpus fingerprint differs");

  auto* reduce = app.add_subcommand("reduce", "Merge the topics of a saved model down to --nr-topics");
  reduce->add_option("--model", model_dir, "Model archive directory")->required();
  reduce->add_flag("--force", force, "Load even if the corpus fingerprint differs");

  auto* dtm = app.add_subcommand("dtm", "Topic words per timestep for a saved model");
  dtm->add_option("--model", model_dir, "Model archive directory")->required();
  dtm->add_flag("--force", force, "Load even if the corpus fingerprint differs");
  DtmFlags dtm_flags;
  add_dtm_flags(*dtm, dtm_flags, "--bins");

  auto* eval = app.add_subcommand("eval", "Score a topics.json file with NPMI coherence and diversity");
  fs::path topics_path;
  std::size_t tc_top_n = 10, td_top_n = 25, window = 10;
  eval->add_option("--topics", topics_path, "topics.json to score")->required();
  eval->add_option("--tc-top-n", tc_top_n, "Words per topic for coherence");
  eval->add_option("--td-top-n", td_top_n, "Words per topic for diversity");
  eval->add_option("--window", window, "Co-occurrence window in tokens");

  auto* bench = app.add_subcommand("bench", "Benchmark protocol: several topic counts times several seeded runs");
  BenchmarkOptions bench_opts;
  std::optional<std::size_t> dynamic_bins;
  bool bench_evolve = false;
  bench->add_option("--topic-counts", bench_opts.topic_counts, "Topic counts to evaluate");
  bench->add_option("--runs", bench_opts.runs, "Runs per topic count");
  bench->add_option("--seeds", bench_opts.seeds, "One seed per run");
  bench->add_option("--name", bench_opts.config_name, "Config name in the report");
  bench->add_option("--dynamic-bins", dynamic_bins, "Score per timestep instead, with this many bins");
  bench->add_flag("--evolve", bench_evolve, "Smooth timesteps in the dynamic benchmark");

  auto* model = app.add_subcommand("model", "Save or inspect a model archive");
  model->require_subcommand(1);
  auto* model_save = model->add_subcommand("save", "Fit and write only the model archive");
  model_save->add_option("dir", model_dir, "Archive directory")->required();
  auto* model_load = model->add_subcommand("load", "Verify an archive against a corpus and print its summary");
  model_load->add_option("dir", model_dir, "Archive directory")->required();
  model_load->add_flag("--force", force, "Load even if the corpus fingerprint differs");

  auto* embed = app.add_subcommand("embed-fallback", "Write TF-IDF projection embeddings as a TPFG file");
  fs::path embed_out;
  embed->add_option("--out", embed_out, "Output TPFG file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }
  if (quiet) spdlog::set_level(spdlog::level::err);

  auto need_corpus = [&] {
    if (corpus_path.empty()) throw ValidationError("--corpus is required");
    return load_jsonl(corpus_path);
  };

  try {
    if (*fit || *model_save) {
      const PipelineConfig config = resolve_config(flags);
      const Corpus raw = need_corpus();
      PipelineResult result = fit_pipeline(config, raw);
      const json config_json = result.config.to_json();
      const fs::path archive = *model_save ? model_dir : out_dir / "model";
      save_model(result.model, result.corpus, archive, config_json);
      if (*model_save) return kExitOk;

      ensure_dir(out_dir);
      const json topics_json = topics_to_json(result.model);
      write_json(out_dir / "topics.json", topics_json);
      write_json(out_dir / "config.json", config_json);
      json files = {{"topics.json", file_sha(out_dir / "topics.json")},
                    {"config.json", file_sha(out_dir / "config.json")},
                    {"model/manifest.json", file_sha(archive / "manifest.json")}};
      if (dtm_requested(fit_dtm)) {
        write_json(out_dir / "dtm.json", run_dtm(result.model, result.corpus, fit_dtm));
        files["dtm.json"] = file_sha(out_dir / "dtm.json");
      }
      const json run = {{"command", "fit"},
                        {"corpus", corpus_path.filename().string()},
                        {"corpus_fingerprint", corpus_fingerprint(result.corpus)},
                        {"documents_raw", raw.size()},
                        {"documents_kept", result.corpus.size()},
                        {"vocab_size", result.model.vocab.size()},
                        {"num_topics", result.model.num_topics()},
                        {"outliers", result.model.assignment.outlier_count()},
                        {"embedding_provenance",
                         result.embeddings.provenance == Provenance::fallback ? "fallback" : "external"},
                        {"seed", config.seed},
                        {"config", config_json},
                        {"files", files}};
      write_json(out_dir / "run.json", run);
      if (report) {
        const auto& t = result.timings;
        write_json(*report, {{"timings_seconds",
                              {{"preprocess", t.preprocess},
                               {"embed", t.embed},
                               {"reduce", t.reduce},
                               {"cluster", t.cluster},
                               {"represent", t.represent},
                               {"total", t.total}}}});
      }
      spdlog::info("{} topics, {} outliers, {} documents kept of {}", result.model.num_topics(),
                   result.model.assignment.outlier_count(), result.corpus.size(), raw.size());
      return kExitOk;
    }

    if (*topics || *reduce || *dtm || *model_load) {
      if (corpus_path.empty()) throw ValidationError("--corpus is required");
      Restored r = restore(model_dir, corpus_path, force);
      TopicModel& m = r.loaded.model;
      if (*topics) {
        if (flags.top_n && *flags.top_n != m.top_n) {
          m.top_n = *flags.top_n;
          m.top_words = top_n_words(m.twm, m.vocab, m.top_n);
        }
        std::cout << topics_to_json(m).dump(2) << "\n";
      } else if (*reduce) {
        if (!flags.nr_topics) throw ValidationError("reduce needs --nr-topics");
        const TopicModel reduced = reduce_topics(m, r.corpus, *flags.nr_topics);
        ensure_dir(out_dir);
        save_model(reduced, r.corpus, out_dir / "model", r.loaded.manifest.at("config"));
        write_json(out_dir / "topics.json", topics_to_json(reduced));
      } else if (*dtm) {
        if (!dtm_requested(dtm_flags)) throw ValidationError("dtm needs --bins <n> or --group-by <field>");
        ensure_dir(out_dir);
        write_json(out_dir / "dtm.json", run_dtm(m, r.corpus, dtm_flags));
      } else {
        json summary = r.loaded.manifest;
        summary.erase("files");
        std::cout << summary.dump(2) << "\n";
      }
      return kExitOk;
    }

    if (*eval) {
      const Corpus raw = need_corpus();
      const PipelineConfig config = resolve_config(flags);
      const Corpus reference = preprocess_for(config, raw);
      json tj;
      try {
        tj = json::parse(read_file(topics_path));
      } catch (const json::exception& e) {
        throw ValidationError("cannot parse " + topics_path.string() + ": " + e.what());
      }
      WordLists lists;
      for (const auto& t : tj) {
        if (t.value("topic_id", 0) < 0) continue;
        std::vector<std::string> words;
        for (const auto& w : t.at("top_words")) words.push_back(w.at("term").get<std::string>());
        lists.push_back(std::move(words));
      }
      const CoherenceResult tc = npmi_coherence(lists, reference, tc_top_n, window);
      const double td = topic_diversity(lists, td_top_n);
      std::cout << json{{"npmi", tc.score}, {"per_topic_npmi", tc.per_topic}, {"oov_words", tc.oov_words},
                        {"topic_diversity", td}}
                       .dump(2)
                << "\n";
      return kExitOk;
    }

    if (*bench) {
      const Corpus raw = need_corpus();
      const PipelineConfig config = resolve_config(flags);
      EvalReport rep;
      if (dynamic_bins) {
        DynamicBenchmarkOptions d;
        d.config_name = bench_opts.config_name;
        d.topic_count = bench_opts.topic_counts.front();
        d.bins = *dynamic_bins;
        d.evolve = bench_evolve;
        d.runs = bench_opts.runs;
        d.seeds = bench_opts.seeds;
        rep = run_dynamic_benchmark(raw, config, d);
      } else {
        rep = run_benchmark(raw, config, bench_opts);
      }
      const std::string csv = report_csv(rep);
      if (report) {
        write_file_atomic(*report, csv);
      } else {
        std::cout << csv;
      }
      if (!quiet) std::cerr << report_table(rep);
      return rep.overall.cells > 0 ? kExitOk : kExitPipeline;
    }

    if (*embed) {
      const PipelineConfig config = resolve_config(flags);
      if (!config.fallback_dim) throw ValidationError("embed-fallback needs --fallback-dim <d>");
      const Corpus corpus = preprocess_for(config, need_corpus());
      const Vocabulary vocab = build_vocabulary(corpus, config.preprocess.min_df);
      write_embeddings(fallback_embed(corpus, vocab, *config.fallback_dim, config.seed), embed_out);
      return kExitOk;
    }
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return exit_code(e.kind());
  } catch (const json::exception& e) {
    spdlog::error("malformed JSON: {}", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitPipeline;
  }
  return kExitOk;
}
