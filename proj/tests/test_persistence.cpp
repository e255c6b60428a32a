#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "test_util.hpp"
#include "topicforge/dynamic.hpp"
#include "topicforge/file_io.hpp"
#include "topicforge/persistence.hpp"
#include "topicforge/pipeline.hpp"

using namespace topicforge;

namespace {

Corpus small_corpus(int salt = 0) {
  std::vector<Document> docs;
  const std::vector<std::vector<std::string>> lex{{"orbit", "rocket", "launch", "moon", "nasa"},
                                                  {"puck", "goalie", "hockey", "season", "ice"},
                                                  {"doctor", "patient", "drug", "pain", "clinic"}};
  std::mt19937_64 gen(11);
  for (int i = 0; i < 90; ++i) {
    Document d;
    d.id = "p" + std::to_string(i);
    const auto& words = lex[static_cast<std::size_t>(i % 3)];
    for (int w = 0; w < 10; ++w) d.raw_text += words[gen() % words.size()] + " ";
    d.raw_text += (i == 0 && salt) ? "different" : "shared text";
    d.timestamp = i;
    docs.push_back(d);
  }
  return Corpus(docs);
}

PipelineConfig small_config() {
  PipelineConfig c;
  c.fallback_dim = 16;
  c.reducer = ReductionMethod::pca;
  c.reducer_params.out_dim = 3;
  c.clusterer = ClustererKind::kmeans;
  c.kmeans_k = 6;
  c.seed = 5;
  return c;
}

std::string slurp(const std::filesystem::path& p) { return read_file(p); }

}  // namespace

TEST(Codecs, RoundTrips) {
  const SparseMatrix m = SparseMatrix::from_triplets(3, 4, {{0, 1, 2.5}, {2, 3, -1e-300}, {1, 0, 7.0}});
  const auto sb = encode_sparse(m);
  const SparseMatrix back = decode_sparse({sb.data(), sb.size()});
  ASSERT_EQ(back.rows(), 3u);
  ASSERT_EQ(back.cols(), 4u);
  EXPECT_EQ(back.at(0, 1), 2.5);
  EXPECT_EQ(back.at(2, 3), -1e-300);
  EXPECT_EQ(back.at(1, 0), 7.0);

  const std::vector<double> v{0.1, -3.0, 1e308};
  const auto bytes = encode_dense(v);
  EXPECT_EQ(decode_dense({bytes.data(), bytes.size()}), v);

  const auto a = ClusterAssignment::from_labels({0, -1, 1, 1}, {0.5, 0.0, 1.0, 0.25});
  const auto ab = encode_assignment(a);
  const auto a2 = decode_assignment({ab.data(), ab.size()});
  EXPECT_EQ(a2.labels, a.labels);
  EXPECT_EQ(a2.probabilities, a.probabilities);
  EXPECT_EQ(a2.K, 2u);
}

TEST(Codecs, TruncatedAndWrongMagic) {
  const auto bytes = encode_dense({1.0, 2.0});
  EXPECT_THROW(decode_dense({bytes.data(), bytes.size() - 1}), IoError);
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_dense({bad.data(), bad.size()}), IoError);
}

class Archive : public ::testing::Test {
 protected:
  void SetUp() override {
    raw = small_corpus();
    fit = fit_pipeline(small_config(), raw);
  }
  Corpus raw;
  PipelineResult fit;
};

TEST_F(Archive, RoundTripGivesIdenticalOutputs) {
  tf_test::TempDir dir("archive");
  save_model(fit.model, fit.corpus, dir.path(), fit.config.to_json());
  const LoadedModel loaded = load_model(dir.path(), fit.corpus);
  const TopicModel& m = loaded.model;

  EXPECT_EQ(topics_to_json(m).dump(), topics_to_json(fit.model).dump());
  EXPECT_EQ(top_n_words(m.twm, m.vocab, 7), top_n_words(fit.model.twm, fit.model.vocab, 7));
  ASSERT_GE(fit.model.num_topics(), 3u);
  EXPECT_EQ(topics_to_json(reduce_topics(m, fit.corpus, 2)).dump(),
            topics_to_json(reduce_topics(fit.model, fit.corpus, 2)).dump());
  const TimeBinning bins = bin_timestamps(fit.corpus, 3);
  const auto a = topics_over_time(m, fit.corpus, bins);
  const auto b = topics_over_time(fit.model, fit.corpus, bins);
  EXPECT_EQ(dtm_to_json(m, bins, a, false).dump(), dtm_to_json(fit.model, bins, b, false).dump());
  EXPECT_EQ(loaded.manifest.at("format_version").get<std::uint32_t>(), kArchiveFormatVersion);
  EXPECT_EQ(loaded.manifest.at("seed").get<std::uint64_t>(), 5u);
}

TEST_F(Archive, SavesAreByteIdentical) {
  tf_test::TempDir d1("archive_a"), d2("archive_b");
  save_model(fit.model, fit.corpus, d1.path(), fit.config.to_json());
  save_model(fit.model, fit.corpus, d2.path(), fit.config.to_json());
  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(d1.path())) {
    ++files;
    EXPECT_EQ(slurp(e.path()), slurp(d2.path() / e.path().filename())) << e.path().filename();
  }
  EXPECT_EQ(files, 7u);
}

TEST_F(Archive, DifferentCorpusNeedsForce) {
  tf_test::TempDir dir("archive_fp");
  save_model(fit.model, fit.corpus, dir.path());
  const Corpus other = preprocess_for(fit.config, small_corpus(1));
  ASSERT_EQ(other.size(), fit.corpus.size());
  try {
    load_model(dir.path(), other);
    FAIL() << "expected a fingerprint error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("fingerprint"), std::string::npos);
  }
  const LoadedModel forced = load_model(dir.path(), other, true);
  EXPECT_EQ(forced.model.num_topics(), fit.model.num_topics());
}

TEST_F(Archive, TruncatedPayloadIsIntegrityError) {
  tf_test::TempDir dir("archive_trunc");
  save_model(fit.model, fit.corpus, dir.path());
  const auto p = dir / "topic_words.bin";
  const std::string bytes = slurp(p);
  tf_test::write_text(p, bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(load_model(dir.path(), fit.corpus), IntegrityError);
  EXPECT_THROW(load_model(dir.path(), fit.corpus, true), IntegrityError);
}

TEST_F(Archive, FlippedByteFailsChecksum) {
  tf_test::TempDir dir("archive_flip");
  save_model(fit.model, fit.corpus, dir.path());
  const auto p = dir / "class_tf.bin";
  std::string bytes = slurp(p);
  bytes[bytes.size() - 3] ^= 0x5a;
  tf_test::write_text(p, bytes);
  try {
    load_model(dir.path(), fit.corpus);
    FAIL() << "expected an integrity error";
  } catch (const IntegrityError& e) {
    EXPECT_NE(std::string(e.what()).find("class_tf.bin"), std::string::npos);
  }
}

TEST_F(Archive, MissingManifestOrPayload) {
  tf_test::TempDir dir("archive_missing");
  EXPECT_THROW(load_model(dir.path(), fit.corpus), IntegrityError);
  save_model(fit.model, fit.corpus, dir.path());
  std::filesystem::remove(dir / "assignment.bin");
  EXPECT_THROW(load_model(dir.path(), fit.corpus), IntegrityError);
}

TEST_F(Archive, VersionMismatch) {
  tf_test::TempDir dir("archive_ver");
  save_model(fit.model, fit.corpus, dir.path());
  auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  manifest["format_version"] = kArchiveFormatVersion + 1;
  tf_test::write_text(dir / "manifest.json", manifest.dump(2));
  try {
    load_model(dir.path(), fit.corpus);
    FAIL() << "expected a version error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
}

TEST_F(Archive, WrongCorpusSizeIsRejectedOnSave) {
  tf_test::TempDir dir("archive_size");
  std::vector<Document> docs(fit.corpus.documents().begin(), fit.corpus.documents().end() - 1);
  EXPECT_THROW(save_model(fit.model, Corpus(docs), dir.path()), ValidationError);
}
