#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "topicforge/corpus.hpp"
#include "topicforge/ctfidf.hpp"
#include "topicforge/errors.hpp"

namespace topicforge {

inline constexpr std::uint32_t kArchiveFormatVersion = 1;
inline constexpr char kSparseMagic[4] = {'T', 'P', 'F', 'S'};
inline constexpr char kDenseMagic[4] = {'T', 'P', 'F', 'D'};
inline constexpr char kAssignmentMagic[4] = {'T', 'P', 'F', 'A'};

// Raised when an archive file is missing, truncated or fails its checksum.
class IntegrityError : public IoError {
 public:
  explicit IntegrityError(const std::string& what) : IoError("model archive integrity: " + what) {}
};

// TPFS: magic, u32 version, u64 rows, u64 cols, u64 nnz, then nnz x (u32 row,
// u32 col, f64 value) in row-major order.
std::vector<char> encode_sparse(const SparseMatrix& m);
SparseMatrix decode_sparse(std::string_view bytes);

// TPFD: magic, u32 version, u64 n, then n x f64.
std::vector<char> encode_dense(const std::vector<double>& v);
std::vector<double> decode_dense(std::string_view bytes);

// TPFA: magic, u32 version, u64 n, then n x i32 label and n x f64 probability.
std::vector<char> encode_assignment(const ClusterAssignment& a);
ClusterAssignment decode_assignment(std::string_view bytes);

struct LoadedModel {
  TopicModel model;
  nlohmann::json manifest;
};

// Writes the archive directory. Payloads are written first and the manifest,
// which carries every payload's size and checksum, last.
void save_model(const TopicModel& model, const Corpus& corpus, const std::filesystem::path& dir,
                const nlohmann::json& config = nlohmann::json::object());

// Verifies version, checksums and the corpus fingerprint (skipped with force).
LoadedModel load_model(const std::filesystem::path& dir, const Corpus& corpus, bool force = false);

}  // namespace topicforge
