#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "topicforge/corpus.hpp"
#include "topicforge/errors.hpp"
#include "topicforge/matrix.hpp"

namespace topicforge {

enum class Provenance { external, fallback };

// One row per document, rows in corpus order.
struct EmbeddingMatrix {
  DenseMatrix<float> values;
  Provenance provenance = Provenance::external;
  std::vector<std::string> doc_ids;

  std::size_t rows() const noexcept { return values.rows(); }
  std::size_t dim() const noexcept { return values.cols(); }
};

// Layout of a `TPFG` file, all integers little-endian:
//   "TPFG" | version u32 | rows u64 | dim u32 |
//   rows x (id length u16 | UTF-8 id bytes) | rows x dim float32, row-major
inline constexpr char kEmbeddingMagic[4] = {'T', 'P', 'F', 'G'};
inline constexpr std::uint32_t kEmbeddingFormatVersion = 1;

class EmbeddingFormatError : public ValidationError {
 public:
  enum class Reason {
    bad_magic,
    unsupported_version,
    truncated,
    trailing_bytes,
    row_count_mismatch,
    id_mismatch,
    non_finite,
    id_too_long,
  };

  EmbeddingFormatError(Reason reason, const std::string& what) : ValidationError(what), reason_(reason) {}

  Reason reason() const noexcept { return reason_; }

 private:
  Reason reason_;
};

// Reads and validates a file on its own (magic, version, size, finiteness).
EmbeddingMatrix read_embeddings(const std::filesystem::path& path);

// Additionally checks that rows and ids match the corpus exactly, in order.
EmbeddingMatrix read_embeddings(const std::filesystem::path& path, const Corpus& corpus);

void write_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path);

std::vector<char> encode_embeddings(const EmbeddingMatrix& matrix);
EmbeddingMatrix decode_embeddings(std::string_view bytes);

// Deterministic stand-in for a sentence encoder: per-document TF-IDF weights
// projected by a seeded sparse random projection, rows L2-normalized.
EmbeddingMatrix fallback_embed(const Corpus& corpus, const Vocabulary& vocab, std::size_t dim, std::uint64_t seed);

// The projection used by fallback_embed: V x dim entries in {-1, 0, +1}, each
// nonzero with probability 1/sqrt(V). A term whose row would be all zero gets
// one seeded nonzero entry so that no term is dropped.
SparseMatrix sparse_random_projection(std::size_t vocab_size, std::size_t dim, std::uint64_t seed);

}  // namespace topicforge
