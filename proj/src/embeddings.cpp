#include "topicforge/embeddings.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "topicforge/binary_io.hpp"
#include "topicforge/ctfidf.hpp"
#include "topicforge/file_io.hpp"
#include "topicforge/random.hpp"

namespace topicforge {

namespace {

using Reason = EmbeddingFormatError::Reason;

[[noreturn]] void truncated() {
  throw EmbeddingFormatError(Reason::truncated, "embedding file is truncated");
}

}  // namespace

std::vector<char> encode_embeddings(const EmbeddingMatrix& matrix) {
  if (matrix.doc_ids.size() != matrix.rows())
    throw ValidationError("embedding matrix has " + std::to_string(matrix.rows()) + " rows but " +
                          std::to_string(matrix.doc_ids.size()) + " ids");
  if (matrix.dim() > std::numeric_limits<std::uint32_t>::max())
    throw ValidationError("embedding dimension too large");
  binary::Writer w;
  w.put_bytes({kEmbeddingMagic, 4});
  w.put<std::uint32_t>(kEmbeddingFormatVersion);
  w.put<std::uint64_t>(matrix.rows());
  w.put<std::uint32_t>(static_cast<std::uint32_t>(matrix.dim()));
  for (const auto& id : matrix.doc_ids) {
    if (id.size() > std::numeric_limits<std::uint16_t>::max())
      throw EmbeddingFormatError(Reason::id_too_long, "document id longer than 65535 bytes");
    w.put<std::uint16_t>(static_cast<std::uint16_t>(id.size()));
    w.put_bytes(id);
  }
  for (float v : matrix.values.data()) w.put<float>(v);
  return w.buffer();
}

EmbeddingMatrix decode_embeddings(std::string_view bytes) {
  binary::Reader r(bytes, truncated);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kEmbeddingMagic, 4) != 0)
    throw EmbeddingFormatError(Reason::bad_magic, "not a TPFG embedding file (bad magic)");
  r.get_bytes(4);
  const auto version = r.get<std::uint32_t>();
  if (version != kEmbeddingFormatVersion)
    throw EmbeddingFormatError(Reason::unsupported_version,
                               "unsupported embedding format version " + std::to_string(version));
  const auto rows = r.get<std::uint64_t>();
  const auto dim = r.get<std::uint32_t>();
  // Each row needs at least a 2-byte id header.
  if (rows > r.remaining() / 2) truncated();

  EmbeddingMatrix m;
  m.provenance = Provenance::external;
  m.doc_ids.reserve(rows);
  for (std::uint64_t i = 0; i < rows; ++i) {
    const auto len = r.get<std::uint16_t>();
    m.doc_ids.emplace_back(r.get_bytes(len));
  }
  const std::uint64_t count = rows * dim;
  if (dim != 0 && count / dim != rows) truncated();
  if (r.remaining() / sizeof(float) < count) truncated();
  std::vector<float> data(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    data[k] = r.get<float>();
    if (!std::isfinite(data[k]))
      throw EmbeddingFormatError(Reason::non_finite, "non-finite value at row " + std::to_string(k / dim) +
                                                         ", column " + std::to_string(k % dim));
  }
  if (r.remaining() != 0)
    throw EmbeddingFormatError(Reason::trailing_bytes,
                               std::to_string(r.remaining()) + " unexpected trailing bytes after payload");
  m.values = DenseMatrix<float>(rows, dim, std::move(data));
  return m;
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  return decode_embeddings(read_file(path));
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path, const Corpus& corpus) {
  EmbeddingMatrix m = read_embeddings(path);
  if (m.rows() != corpus.size())
    throw EmbeddingFormatError(Reason::row_count_mismatch, "embedding file has " + std::to_string(m.rows()) +
                                                               " rows but the corpus has " +
                                                               std::to_string(corpus.size()) + " documents");
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (m.doc_ids[i] != corpus[i].id)
      throw EmbeddingFormatError(Reason::id_mismatch, "row " + std::to_string(i) + " has id '" + m.doc_ids[i] +
                                                          "' but the corpus expects '" + corpus[i].id + "'");
  }
  return m;
}

void write_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path) {
  write_file_atomic(path, encode_embeddings(matrix));
}

SparseMatrix sparse_random_projection(std::size_t vocab_size, std::size_t dim, std::uint64_t seed) {
  const double density = vocab_size == 0 ? 0.0 : 1.0 / std::sqrt(static_cast<double>(vocab_size));
  std::vector<Triplet> entries;
  Rng rng(mix_seed(seed, 0x70726f6a));
  for (std::size_t t = 0; t < vocab_size; ++t) {
    bool any = false;
    for (std::size_t j = 0; j < dim; ++j) {
      const double u = rng.uniform();
      if (u < density) {
        entries.push_back({static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(j),
                           u < density / 2 ? -1.0 : 1.0});
        any = true;
      }
    }
    if (!any) {
      const auto j = static_cast<std::uint32_t>(rng.below(dim));
      entries.push_back({static_cast<std::uint32_t>(t), j, rng.uniform() < 0.5 ? -1.0 : 1.0});
    }
  }
  return SparseMatrix::from_triplets(vocab_size, dim, std::move(entries));
}

EmbeddingMatrix fallback_embed(const Corpus& corpus, const Vocabulary& vocab, std::size_t dim, std::uint64_t seed) {
  if (vocab.empty()) throw ValidationError("fallback embedder needs a non-empty vocabulary");
  if (dim < 2) throw ValidationError("fallback embedding dimension must be at least 2");

  const SparseMatrix tfidf = classic_tfidf(corpus, vocab);
  const SparseMatrix projection = sparse_random_projection(vocab.size(), dim, seed);

  EmbeddingMatrix m;
  m.provenance = Provenance::fallback;
  m.values = DenseMatrix<float>(corpus.size(), dim);
  std::vector<double> acc(dim);
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    m.doc_ids.push_back(corpus[d].id);
    std::fill(acc.begin(), acc.end(), 0.0);
    auto idx = tfidf.row_indices(d);
    auto val = tfidf.row_values(d);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      auto pj = projection.row_indices(idx[k]);
      auto pv = projection.row_values(idx[k]);
      for (std::size_t q = 0; q < pj.size(); ++q) acc[pj[q]] += val[k] * pv[q];
    }
    double norm = 0.0;
    for (double v : acc) norm += v * v;
    norm = std::sqrt(norm);
    auto row = m.values.row(d);
    if (norm > 0.0) {
      for (std::size_t j = 0; j < dim; ++j) row[j] = static_cast<float>(acc[j] / norm);
    } else {
      // No informative terms: every such document shares the same unit row.
      const auto uniform = static_cast<float>(1.0 / std::sqrt(static_cast<double>(dim)));
      for (auto& v : row) v = uniform;
    }
  }
  return m;
}

}  // namespace topicforge
