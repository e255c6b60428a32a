#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "topicforge/embeddings.hpp"
#include "topicforge/matrix.hpp"

namespace topicforge {

enum class ReductionMethod { pca, umap };

struct ReducerParams {
  std::size_t n_neighbors = 15;
  double min_dist = 0.1;
  std::size_t out_dim = 5;
  std::size_t epochs = 200;
  std::uint64_t seed = 42;
  // Output-space similarity curve 1 / (1 + a d^(2b)); the defaults fit min_dist = 0.1.
  double curve_a = 1.577;
  double curve_b = 0.895;
  std::size_t negative_sample_rate = 5;
  double learning_rate = 1.0;
  // Embed exact duplicate rows once and copy the coordinates to every copy.
  bool unique_rows = true;

  void validate() const;
};

struct ReducedEmbedding {
  DenseMatrix<double> data;
  ReductionMethod method = ReductionMethod::pca;
  ReducerParams params;

  std::size_t rows() const noexcept { return data.rows(); }
  std::size_t out_dim() const noexcept { return data.cols(); }
};

DenseMatrix<double> to_double(const DenseMatrix<float>& m);

// ---- PCA ------------------------------------------------------------------

struct PcaFit {
  std::vector<double> mean;
  // out_dim x dim, one unit principal axis per row, by descending eigenvalue.
  // Each axis is signed so that its largest-magnitude entry is positive.
  DenseMatrix<double> components;
  std::vector<double> eigenvalues;
  DenseMatrix<double> projection;
};

PcaFit pca_fit(const DenseMatrix<double>& x, std::size_t out_dim);
ReducedEmbedding pca_reduce(const EmbeddingMatrix& x, std::size_t out_dim);

// ---- UMAP-style neighbor embedding -----------------------------------------

// Exact k nearest neighbors under cosine distance, self excluded. Row i of
// indices/distances lists neighbors by ascending distance, ties by index.
struct KnnGraph {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<std::size_t> indices;
  std::vector<double> distances;

  std::span<const std::size_t> neighbors(std::size_t i) const { return {indices.data() + i * k, k}; }
  std::span<const double> neighbor_distances(std::size_t i) const { return {distances.data() + i * k, k}; }
};

double cosine_distance(std::span<const double> a, std::span<const double> b);
KnnGraph exact_knn_cosine(const DenseMatrix<double>& x, std::size_t k);

struct Bandwidth {
  double rho = 0.0;
  double sigma = 1.0;
  // sum_j exp(-max(0, d_j - rho) / sigma) at the returned sigma.
  double membership_sum = 0.0;
  std::size_t iterations = 0;
};

inline constexpr std::size_t kBandwidthMaxIterations = 64;
inline constexpr double kBandwidthTolerance = 1e-5;

// Binary search for sigma so the membership sum reaches target (log2 k).
Bandwidth calibrate_bandwidth(std::span<const double> distances, double target);

// Symmetrized fuzzy neighbor graph, w = a + b - a*b, as an N x N sparse matrix.
SparseMatrix fuzzy_neighbor_graph(const KnnGraph& knn);

ReducedEmbedding umap_reduce(const DenseMatrix<double>& x, const ReducerParams& params);
ReducedEmbedding umap_reduce(const EmbeddingMatrix& x, const ReducerParams& params);

}  // namespace topicforge
