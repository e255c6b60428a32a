#include <gtest/gtest.h>

#include <cstring>
#include <limits>
#include <random>

#include "test_util.hpp"
#include "topicforge/ctfidf.hpp"
#include "topicforge/embeddings.hpp"
#include "topicforge/file_io.hpp"

using namespace topicforge;
using Reason = EmbeddingFormatError::Reason;

namespace {

// Builds a TPFG file byte by byte, independent of the library writer.
std::string tpfg_bytes(const std::vector<std::string>& ids, std::uint32_t dim, const std::vector<float>& values,
                       std::uint32_t version = 1) {
  std::string out = "TPFG";
  auto put = [&](auto v) {
    for (std::size_t i = 0; i < sizeof(v); ++i) out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
  };
  put(version);
  put(static_cast<std::uint64_t>(ids.size()));
  put(dim);
  for (const auto& id : ids) {
    put(static_cast<std::uint16_t>(id.size()));
    out += id;
  }
  for (float f : values) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put(bits);
  }
  return out;
}

Reason reason_of(const std::string& bytes) {
  try {
    decode_embeddings(bytes);
  } catch (const EmbeddingFormatError& e) {
    return e.reason();
  }
  ADD_FAILURE() << "no error";
  return Reason::bad_magic;
}

Corpus ids_corpus(std::size_t n) {
  std::vector<Document> docs;
  for (std::size_t i = 0; i < n; ++i) docs.push_back(tf_test::doc("doc" + std::to_string(i), {"w"}));
  return Corpus(docs);
}

}  // namespace

TEST(Tpfg, ReadsHandBuiltFile) {
  tf_test::TempDir dir("emb");
  std::vector<float> vals(12);
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = 0.25f * static_cast<float>(i) - 1.0f;
  tf_test::write_text(dir / "e.tpfg", tpfg_bytes({"doc0", "doc1", "doc2"}, 4, vals));
  const EmbeddingMatrix m = read_embeddings(dir / "e.tpfg", ids_corpus(3));
  ASSERT_EQ(m.rows(), 3u);
  ASSERT_EQ(m.dim(), 4u);
  EXPECT_EQ(m.values(2, 3), vals[11]);
  EXPECT_EQ(m.provenance, Provenance::external);
}

TEST(Tpfg, RowCountAndIdMismatch) {
  tf_test::TempDir dir("emb");
  tf_test::write_text(dir / "e.tpfg", tpfg_bytes({"doc0", "doc1", "doc2"}, 1, {1, 2, 3}));
  try {
    read_embeddings(dir / "e.tpfg", ids_corpus(4));
    FAIL();
  } catch (const EmbeddingFormatError& e) {
    EXPECT_EQ(e.reason(), Reason::row_count_mismatch);
  }
  tf_test::write_text(dir / "f.tpfg", tpfg_bytes({"doc0", "docX", "doc2"}, 1, {1, 2, 3}));
  try {
    read_embeddings(dir / "f.tpfg", ids_corpus(3));
    FAIL();
  } catch (const EmbeddingFormatError& e) {
    EXPECT_EQ(e.reason(), Reason::id_mismatch);
  }
}

TEST(Tpfg, PayloadIsLittleEndianFloats) {
  EmbeddingMatrix m;
  m.values = DenseMatrix<float>(1, 2, std::vector<float>{0.5f, -1.0f});
  m.doc_ids = {"a"};
  const auto bytes = encode_embeddings(m);
  const std::string expected = tpfg_bytes({"a"}, 2, {0.5f, -1.0f});
  EXPECT_EQ(std::string(bytes.begin(), bytes.end()), expected);
  const unsigned char tail[8] = {0x00, 0x00, 0x00, 0x3F, 0x00, 0x00, 0x80, 0xBF};
  EXPECT_EQ(std::memcmp(bytes.data() + bytes.size() - 8, tail, 8), 0);
}

TEST(Tpfg, EmptyMatrixHasHeaderOnly) {
  EmbeddingMatrix m;
  m.values = DenseMatrix<float>(0, 8);
  const auto bytes = encode_embeddings(m);
  EXPECT_EQ(bytes.size(), 4u + 4u + 8u + 4u);
  const EmbeddingMatrix back = decode_embeddings({bytes.data(), bytes.size()});
  EXPECT_EQ(back.rows(), 0u);
  EXPECT_EQ(back.dim(), 8u);
}

TEST(Tpfg, RandomRoundTripBitExact) {
  tf_test::TempDir dir("emb");
  std::mt19937_64 gen(5);
  std::normal_distribution<float> nd(0.0f, 3.0f);
  EmbeddingMatrix m;
  m.values = DenseMatrix<float>(100, 64);
  for (auto& v : m.values.data()) v = nd(gen);
  m.values(0, 0) = std::numeric_limits<float>::denorm_min();
  m.values(0, 1) = -0.0f;
  for (int i = 0; i < 100; ++i) m.doc_ids.push_back("id-" + std::to_string(i));
  write_embeddings(m, dir / "r.tpfg");
  const EmbeddingMatrix back = read_embeddings(dir / "r.tpfg");
  EXPECT_EQ(back.doc_ids, m.doc_ids);
  ASSERT_EQ(back.values.data().size(), m.values.data().size());
  EXPECT_EQ(std::memcmp(back.values.data().data(), m.values.data().data(), m.values.data().size() * 4), 0);
}

TEST(Tpfg, RejectsMalformedFiles) {
  const std::string good = tpfg_bytes({"a", "b"}, 2, {1, 2, 3, 4});
  EXPECT_EQ(reason_of("XPFG" + good.substr(4)), Reason::bad_magic);
  EXPECT_EQ(reason_of(tpfg_bytes({"a"}, 1, {1}, 2)), Reason::unsupported_version);
  EXPECT_EQ(reason_of(good.substr(0, good.size() - 3)), Reason::truncated);
  EXPECT_EQ(reason_of(good.substr(0, 10)), Reason::truncated);
  EXPECT_EQ(reason_of(good + "x"), Reason::trailing_bytes);
  EXPECT_EQ(reason_of(tpfg_bytes({"a"}, 2, {1, std::numeric_limits<float>::quiet_NaN()})), Reason::non_finite);
  EXPECT_EQ(reason_of(tpfg_bytes({"a"}, 1, {std::numeric_limits<float>::infinity()})), Reason::non_finite);
  EXPECT_EQ(reason_of(""), Reason::bad_magic);
}

namespace {

Corpus small_docs() {
  return tf_test::token_corpus({{"space", "orbit", "rocket", "launch"},
                                {"space", "orbit", "rocket", "launch"},
                                {"hockey", "puck", "goalie", "season"},
                                {"doctor", "patient", "space"}});
}

double row_dot(const DenseMatrix<float>& m, std::size_t a, std::size_t b) {
  double s = 0;
  for (std::size_t j = 0; j < m.cols(); ++j) s += static_cast<double>(m(a, j)) * m(b, j);
  return s;
}

}  // namespace

TEST(Fallback, DeterministicUnitRows) {
  const Corpus c = small_docs();
  const Vocabulary v = build_vocabulary(c);
  const EmbeddingMatrix a = fallback_embed(c, v, 32, 9);
  const EmbeddingMatrix b = fallback_embed(c, v, 32, 9);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.provenance, Provenance::fallback);
  for (std::size_t i = 0; i < a.rows(); ++i) EXPECT_NEAR(row_dot(a.values, i, i), 1.0, 1e-6);
  for (std::size_t j = 0; j < 32; ++j) EXPECT_EQ(a.values(0, j), a.values(1, j));
  EXPECT_NEAR(row_dot(a.values, 0, 1), 1.0, 1e-6);
  EXPECT_LT(row_dot(a.values, 0, 2), row_dot(a.values, 0, 1));
}

TEST(Fallback, SeedChangesMatrix) {
  const Corpus c = small_docs();
  const Vocabulary v = build_vocabulary(c);
  EXPECT_NE(fallback_embed(c, v, 32, 1).values, fallback_embed(c, v, 32, 2).values);
}

TEST(Fallback, TfidfRowsAreLocalToDocuments) {
  Corpus c = small_docs();
  std::vector<Document> docs = c.documents();
  docs[3].tokens = {"doctor", "patient", "nurse"};
  const Corpus changed(docs);
  const Vocabulary v = build_vocabulary(c);
  const SparseMatrix a = classic_tfidf(c, v);
  const SparseMatrix b = classic_tfidf(changed, v);
  // row 2 shares no term with the edited document
  EXPECT_EQ(a.dense_row(2), b.dense_row(2));
}

TEST(Fallback, ProjectionHasNonzeroPerTerm) {
  const SparseMatrix p = sparse_random_projection(500, 16, 3);
  ASSERT_EQ(p.rows(), 500u);
  for (std::size_t t = 0; t < 500; ++t) EXPECT_GT(p.row_indices(t).size(), 0u) << t;
}

TEST(Fallback, RejectsBadInput) {
  const Corpus c = small_docs();
  EXPECT_THROW(fallback_embed(c, build_vocabulary(c), 1, 1), ValidationError);
  EXPECT_THROW(fallback_embed(c, Vocabulary(), 8, 1), ValidationError);
}
