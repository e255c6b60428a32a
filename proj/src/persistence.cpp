#include "topicforge/persistence.hpp"

#include <cstring>
#include <map>

#include <spdlog/spdlog.h>

#include "topicforge/binary_io.hpp"
#include "topicforge/file_io.hpp"
#include "topicforge/pipeline.hpp"

namespace topicforge {

using nlohmann::json;

namespace {

[[noreturn]] void truncated() { throw IntegrityError("payload is truncated"); }

template <typename R>
void expect_header(R& r, const char* magic, std::string_view bytes, const char* what) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), magic, 4) != 0)
    throw IntegrityError(std::string(what) + " payload has a bad magic");
  r.get_bytes(4);
  const auto version = r.template get<std::uint32_t>();
  if (version != kArchiveFormatVersion)
    throw ValidationError(std::string(what) + " payload has unsupported version " + std::to_string(version));
}

template <typename R>
void expect_end(R& r, const char* what) {
  if (r.remaining() != 0) throw IntegrityError(std::string(what) + " payload has trailing bytes");
}

const char* const kFiles[] = {"vocabulary.json", "assignment.bin", "class_tf.bin", "class_stats.bin",
                              "topic_words.bin", "top_words.json"};

}  // namespace

std::vector<char> encode_sparse(const SparseMatrix& m) {
  binary::Writer w;
  w.put_bytes({kSparseMagic, 4});
  w.put(kArchiveFormatVersion);
  w.put(static_cast<std::uint64_t>(m.rows()));
  w.put(static_cast<std::uint64_t>(m.cols()));
  w.put(static_cast<std::uint64_t>(m.nnz()));
  for (const auto& t : m.triplets()) {
    w.put(t.row);
    w.put(t.col);
    w.put(t.value);
  }
  return w.buffer();
}

SparseMatrix decode_sparse(std::string_view bytes) {
  binary::Reader r(bytes, truncated);
  expect_header(r, kSparseMagic, bytes, "sparse matrix");
  const auto rows = r.get<std::uint64_t>();
  const auto cols = r.get<std::uint64_t>();
  const auto nnz = r.get<std::uint64_t>();
  if (nnz > r.remaining() / 16) truncated();
  std::vector<Triplet> t(nnz);
  for (auto& e : t) {
    e.row = r.get<std::uint32_t>();
    e.col = r.get<std::uint32_t>();
    e.value = r.get<double>();
    if (e.row >= rows || e.col >= cols) throw IntegrityError("sparse entry outside the matrix shape");
  }
  expect_end(r, "sparse matrix");
  return SparseMatrix::from_triplets(rows, cols, std::move(t));
}

std::vector<char> encode_dense(const std::vector<double>& v) {
  binary::Writer w;
  w.put_bytes({kDenseMagic, 4});
  w.put(kArchiveFormatVersion);
  w.put(static_cast<std::uint64_t>(v.size()));
  for (double x : v) w.put(x);
  return w.buffer();
}

std::vector<double> decode_dense(std::string_view bytes) {
  binary::Reader r(bytes, truncated);
  expect_header(r, kDenseMagic, bytes, "dense vector");
  const auto n = r.get<std::uint64_t>();
  if (n > r.remaining() / 8) truncated();
  std::vector<double> v(n);
  for (auto& x : v) x = r.get<double>();
  expect_end(r, "dense vector");
  return v;
}

std::vector<char> encode_assignment(const ClusterAssignment& a) {
  binary::Writer w;
  w.put_bytes({kAssignmentMagic, 4});
  w.put(kArchiveFormatVersion);
  w.put(static_cast<std::uint64_t>(a.size()));
  for (int l : a.labels) w.put(static_cast<std::int32_t>(l));
  for (double p : a.probabilities) w.put(p);
  return w.buffer();
}

ClusterAssignment decode_assignment(std::string_view bytes) {
  binary::Reader r(bytes, truncated);
  expect_header(r, kAssignmentMagic, bytes, "assignment");
  const auto n = r.get<std::uint64_t>();
  if (n > r.remaining() / 12) truncated();
  std::vector<int> labels(n);
  std::vector<double> probs(n);
  for (auto& l : labels) l = r.get<std::int32_t>();
  for (auto& p : probs) p = r.get<double>();
  expect_end(r, "assignment");
  return ClusterAssignment::from_labels(std::move(labels), std::move(probs));
}

void save_model(const TopicModel& model, const Corpus& corpus, const std::filesystem::path& dir, const json& config) {
  if (model.assignment.size() != corpus.size())
    throw ValidationError("model was fitted on " + std::to_string(model.assignment.size()) +
                          " documents but the corpus has " + std::to_string(corpus.size()));
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create archive directory " + dir.string() + ": " + ec.message());

  std::map<std::string, std::string> payloads;
  payloads["vocabulary.json"] =
      json{{"terms", model.vocab.terms()}, {"document_frequency", model.vocab.document_frequencies()}}.dump();
  const auto assignment = encode_assignment(model.assignment);
  payloads["assignment.bin"] = {assignment.begin(), assignment.end()};
  const auto tf = encode_sparse(model.ctm.tf);
  payloads["class_tf.bin"] = {tf.begin(), tf.end()};
  std::vector<double> stats{model.ctm.average_class_words, model.options.log_base};
  stats.insert(stats.end(), model.ctm.tf_global.begin(), model.ctm.tf_global.end());
  stats.insert(stats.end(), model.ctm.outlier_tf.begin(), model.ctm.outlier_tf.end());
  const auto dense = encode_dense(stats);
  payloads["class_stats.bin"] = {dense.begin(), dense.end()};
  const auto weights = encode_sparse(model.twm.weights);
  payloads["topic_words.bin"] = {weights.begin(), weights.end()};
  json words = json::array();
  for (std::size_t k = 0; k < model.num_topics(); ++k) {
    json list = json::array();
    for (const auto& tw : model.top_words[k]) list.push_back({{"term", tw.term}, {"weight", tw.weight}});
    words.push_back({{"topic_id", k}, {"size", model.topic_sizes[k]}, {"top_words", std::move(list)}});
  }
  payloads["top_words.json"] = words.dump();

  json files = json::object();
  for (const auto& [name, bytes] : payloads) {
    write_file_atomic(dir / name, bytes);
    files[name] = {{"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}};
  }
  json manifest = {{"format", "topicforge-model"},
                   {"format_version", kArchiveFormatVersion},
                   {"corpus_fingerprint", corpus_fingerprint(corpus)},
                   {"num_documents", corpus.size()},
                   {"num_topics", model.num_topics()},
                   {"vocab_size", model.vocab.size()},
                   {"top_n", model.top_n},
                   {"config", config},
                   {"files", files}};
  if (config.contains("seed")) manifest["seed"] = config["seed"];
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

LoadedModel load_model(const std::filesystem::path& dir, const Corpus& corpus, bool force) {
  if (!std::filesystem::exists(dir / "manifest.json"))
    throw IntegrityError("no manifest.json in " + dir.string());
  LoadedModel out;
  try {
    out.manifest = json::parse(read_file(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw IntegrityError(std::string("manifest is unreadable: ") + e.what());
  }
  const json& m = out.manifest;
  try {
    if (m.at("format").get<std::string>() != "topicforge-model") throw IntegrityError("not a topicforge model archive");
    const auto version = m.at("format_version").get<std::uint32_t>();
    if (version != kArchiveFormatVersion)
      throw ValidationError("archive format version " + std::to_string(version) + " is not supported (expected " +
                            std::to_string(kArchiveFormatVersion) + ")");

    const std::string fingerprint = corpus_fingerprint(corpus);
    if (fingerprint != m.at("corpus_fingerprint").get<std::string>()) {
      if (!force)
        throw ValidationError("corpus fingerprint mismatch: the archive was fitted on a different corpus "
                              "(pass --force to load anyway)");
      spdlog::warn("corpus fingerprint mismatch ignored because of --force");
    }

    std::map<std::string, std::string> payloads;
    for (const char* name : kFiles) {
      if (!m.at("files").contains(name)) throw IntegrityError(std::string("manifest does not list ") + name);
      const json& entry = m.at("files").at(name);
      std::string bytes;
      try {
        bytes = read_file(dir / name);
      } catch (const IoError&) {
        throw IntegrityError(std::string("payload ") + name + " is missing");
      }
      if (bytes.size() != entry.at("bytes").get<std::size_t>())
        throw IntegrityError(std::string("payload ") + name + " has " + std::to_string(bytes.size()) +
                             " bytes, expected " + std::to_string(entry.at("bytes").get<std::size_t>()));
      if (sha256_hex(bytes) != entry.at("sha256").get<std::string>())
        throw IntegrityError(std::string("payload ") + name + " fails its checksum");
      payloads[name] = std::move(bytes);
    }

    TopicModel model;
    const json vocab = json::parse(payloads["vocabulary.json"]);
    model.vocab = Vocabulary(vocab.at("terms").get<std::vector<std::string>>(),
                             vocab.at("document_frequency").get<std::vector<std::size_t>>());
    model.assignment = decode_assignment(payloads["assignment.bin"]);
    model.ctm.tf = decode_sparse(payloads["class_tf.bin"]);
    model.ctm.K = model.ctm.tf.rows();
    const auto stats = decode_dense(payloads["class_stats.bin"]);
    const std::size_t v = model.vocab.size();
    if (stats.size() != 2 + 2 * v) throw IntegrityError("class statistics do not match the vocabulary size");
    model.ctm.average_class_words = stats[0];
    model.options.log_base = stats[1];
    model.ctm.tf_global.assign(stats.begin() + 2, stats.begin() + 2 + static_cast<std::ptrdiff_t>(v));
    model.ctm.outlier_tf.assign(stats.begin() + 2 + static_cast<std::ptrdiff_t>(v), stats.end());
    model.twm.weights = decode_sparse(payloads["topic_words.bin"]);
    model.top_n = m.at("top_n").get<std::size_t>();
    const json words = json::parse(payloads["top_words.json"]);
    for (const auto& topic : words) {
      model.topic_sizes.push_back(topic.at("size").get<std::size_t>());
      std::vector<TermWeight> list;
      for (const auto& tw : topic.at("top_words"))
        list.push_back({tw.at("term").get<std::string>(), tw.at("weight").get<double>()});
      model.top_words.push_back(std::move(list));
    }

    const std::size_t k = m.at("num_topics").get<std::size_t>();
    if (model.assignment.K != k || model.ctm.K != k || model.twm.weights.rows() != k || model.top_words.size() != k ||
        model.ctm.tf.cols() != v || model.twm.weights.cols() != v)
      throw IntegrityError("payload shapes disagree with the manifest");
    if (model.assignment.size() != corpus.size())
      throw ValidationError("archive holds " + std::to_string(model.assignment.size()) +
                            " document labels but the corpus has " + std::to_string(corpus.size()));
    out.model = std::move(model);
  } catch (const json::exception& e) {
    throw IntegrityError(std::string("malformed archive metadata: ") + e.what());
  }
  return out;
}

}  // namespace topicforge
