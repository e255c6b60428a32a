#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "topicforge/matrix.hpp"
#include "topicforge/reduction.hpp"

namespace topicforge {

inline constexpr int kOutlierLabel = -1;

// Hard labels (-1 = outlier, otherwise 0..K-1) with per-document membership
// strength. Outliers have probability 0.
struct ClusterAssignment {
  std::vector<int> labels;
  std::size_t K = 0;
  std::vector<double> probabilities;
  std::vector<std::size_t> cluster_sizes;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t outlier_count() const;

  // Derives K and cluster sizes; throws unless labels are exactly {-1} u {0..K-1}.
  static ClusterAssignment from_labels(std::vector<int> labels, std::vector<double> probabilities);
};

struct HdbscanParams {
  std::size_t min_cluster_size = 10;
  // Defaults to min_cluster_size.
  std::optional<std::size_t> min_samples;

  std::size_t resolved_min_samples() const { return min_samples.value_or(min_cluster_size); }
  void validate() const;
};

struct MstEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  double weight = 0.0;
};

// Merge step of the single-linkage dendrogram. Leaves are 0..N-1 and the
// merge at position i creates node N + i.
struct LinkageStep {
  std::size_t left = 0;
  std::size_t right = 0;
  double distance = 0.0;
  std::size_t size = 0;
};

struct CondensedTreeEdge {
  std::size_t parent = 0;
  std::size_t child = 0;
  double lambda = 0.0;
  std::size_t child_size = 0;
};

// Points are nodes 0..N-1; clusters are N (the root) and upward. Edges are
// emitted parent-first, so child cluster ids exceed their parent's.
struct CondensedTree {
  std::size_t num_points = 0;
  std::size_t num_clusters = 0;
  std::vector<CondensedTreeEdge> edges;
  // Indexed by cluster id - num_points.
  std::vector<double> stability;
  // Cluster node id of each output label 0..K-1.
  std::vector<std::size_t> selected;

  std::size_t root() const noexcept { return num_points; }
};

struct HdbscanResult {
  ClusterAssignment assignment;
  CondensedTree tree;
  std::vector<double> core_distances;
  std::vector<MstEdge> mst;
};

// Lambda used for merges at distance zero.
inline constexpr double kMaxLambda = 1e12;

std::vector<double> core_distances(const DenseMatrix<double>& x, std::size_t min_samples);
double mutual_reachability(const DenseMatrix<double>& x, std::span<const double> core, std::size_t a, std::size_t b);

// Prim's algorithm over the complete mutual-reachability graph.
std::vector<MstEdge> mutual_reachability_mst(const DenseMatrix<double>& x, std::span<const double> core);

std::vector<LinkageStep> single_linkage(std::vector<MstEdge> mst, std::size_t num_points);
CondensedTree condense_tree(const std::vector<LinkageStep>& linkage, std::size_t num_points,
                            std::size_t min_cluster_size);

// Excess-of-mass selection on the condensed tree, then labels and
// probabilities. Fills tree.stability and tree.selected.
ClusterAssignment extract_clusters(CondensedTree& tree);

HdbscanResult hdbscan_fit(const DenseMatrix<double>& x, const HdbscanParams& params);
HdbscanResult hdbscan_fit(const ReducedEmbedding& x, const HdbscanParams& params);

// Points of each selected cluster that persist to the densest level of one of
// its leaf sub-clusters.
std::vector<std::vector<std::size_t>> cluster_exemplars(const CondensedTree& tree);

// N x K soft membership: inverse distance to each cluster's exemplar set,
// normalized per row. The hard label always holds the largest share of a
// clustered point's row.
DenseMatrix<double> soft_memberships(const ClusterAssignment& assignment, const CondensedTree& tree,
                                     const DenseMatrix<double>& x);
DenseMatrix<double> soft_memberships(const ClusterAssignment& assignment, const CondensedTree& tree,
                                     const ReducedEmbedding& x);

struct KMeansResult {
  ClusterAssignment assignment;
  DenseMatrix<double> centroids;
  double inertia = 0.0;
  std::size_t iterations = 0;
};

inline constexpr std::size_t kKMeansMaxIterations = 300;
inline constexpr double kKMeansTolerance = 1e-6;

KMeansResult kmeans_fit(const DenseMatrix<double>& x, std::size_t k, std::uint64_t seed);
KMeansResult kmeans_fit(const ReducedEmbedding& x, std::size_t k, std::uint64_t seed);

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace topicforge
