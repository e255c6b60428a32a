#include "topicforge/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <Eigen/Dense>

#include "topicforge/errors.hpp"
#include "topicforge/parallel.hpp"
#include "topicforge/random.hpp"

namespace topicforge {

void ReducerParams::validate() const {
  if (n_neighbors < 2) throw ValidationError("n_neighbors must be at least 2");
  if (!(min_dist >= 0.0 && min_dist < 1.0)) throw ValidationError("min_dist must lie in [0, 1)");
  if (out_dim < 2) throw ValidationError("out_dim must be at least 2");
  if (epochs < 1) throw ValidationError("epochs must be at least 1");
  if (!(curve_a > 0.0) || !(curve_b > 0.0)) throw ValidationError("curve parameters must be positive");
}

DenseMatrix<double> to_double(const DenseMatrix<float>& m) {
  std::vector<double> data(m.data().begin(), m.data().end());
  return DenseMatrix<double>(m.rows(), m.cols(), std::move(data));
}

PcaFit pca_fit(const DenseMatrix<double>& x, std::size_t out_dim) {
  const std::size_t n = x.rows();
  const std::size_t dim = x.cols();
  if (n < 2) throw ValidationError("PCA needs at least two rows");
  if (out_dim < 1 || out_dim > dim)
    throw ValidationError("PCA output dimension " + std::to_string(out_dim) + " must lie in [1, " +
                          std::to_string(dim) + "]");

  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMatrix> data(x.data().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const RowMatrix centered = data.rowwise() - mean;
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw PipelineError("PCA eigendecomposition failed");

  PcaFit fit;
  fit.mean.assign(mean.data(), mean.data() + dim);
  fit.components = DenseMatrix<double>(out_dim, dim);
  for (std::size_t c = 0; c < out_dim; ++c) {
    const auto col = static_cast<Eigen::Index>(dim - 1 - c);
    Eigen::VectorXd axis = solver.eigenvectors().col(col);
    Eigen::Index pivot = 0;
    for (Eigen::Index j = 1; j < axis.size(); ++j) {
      if (std::abs(axis(j)) > std::abs(axis(pivot))) pivot = j;
    }
    if (axis(pivot) < 0) axis = -axis;
    for (std::size_t j = 0; j < dim; ++j) fit.components(c, j) = axis(static_cast<Eigen::Index>(j));
    fit.eigenvalues.push_back(std::max(0.0, solver.eigenvalues()(col)));
  }
  fit.projection = DenseMatrix<double>(n, out_dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < out_dim; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < dim; ++j) s += centered(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * fit.components(c, j);
      fit.projection(i, c) = s;
    }
  }
  return fit;
}

ReducedEmbedding pca_reduce(const EmbeddingMatrix& x, std::size_t out_dim) {
  ReducedEmbedding out;
  out.data = pca_fit(to_double(x.values), out_dim).projection;
  out.method = ReductionMethod::pca;
  out.params.out_dim = out_dim;
  return out;
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 && nb == 0.0) return 0.0;
  if (na == 0.0 || nb == 0.0) return 1.0;
  return std::max(0.0, 1.0 - dot / (std::sqrt(na) * std::sqrt(nb)));
}

KnnGraph exact_knn_cosine(const DenseMatrix<double>& x, std::size_t k) {
  const std::size_t n = x.rows();
  if (k >= n) throw ValidationError("k must be smaller than the number of rows");
  KnnGraph g;
  g.n = n;
  g.k = k;
  g.indices.resize(n * k);
  g.distances.resize(n * k);

  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (double v : x.row(i)) s += v * v;
    norms[i] = std::sqrt(s);
  }
  parallel_for(n, [&](std::size_t i) {
    std::vector<std::pair<double, std::size_t>> cand;
    cand.reserve(n - 1);
    auto xi = x.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      auto xj = x.row(j);
      double d;
      if (norms[i] == 0.0 || norms[j] == 0.0) {
        d = (norms[i] == 0.0 && norms[j] == 0.0) ? 0.0 : 1.0;
      } else {
        double dot = 0.0;
        for (std::size_t c = 0; c < xi.size(); ++c) dot += xi[c] * xj[c];
        d = std::max(0.0, 1.0 - dot / (norms[i] * norms[j]));
      }
      cand.emplace_back(d, j);
    }
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    for (std::size_t q = 0; q < k; ++q) {
      g.distances[i * k + q] = cand[q].first;
      g.indices[i * k + q] = cand[q].second;
    }
  }, 16);
  return g;
}

Bandwidth calibrate_bandwidth(std::span<const double> distances, double target) {
  Bandwidth out;
  if (distances.empty()) return out;
  out.rho = *std::min_element(distances.begin(), distances.end());
  auto membership_sum = [&](double sigma) {
    double s = 0.0;
    for (double d : distances) {
      const double gap = std::max(0.0, d - out.rho);
      s += gap == 0.0 ? 1.0 : std::exp(-gap / sigma);
    }
    return s;
  };
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  double mid = 1.0;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= kBandwidthMaxIterations; ++it) {
    const double sum = membership_sum(mid);
    const double err = std::abs(sum - target);
    if (err < best_err) {
      best_err = err;
      out.sigma = mid;
      out.membership_sum = sum;
      out.iterations = it;
    }
    if (err < kBandwidthTolerance) break;
    if (sum > target) {
      hi = mid;
      mid = (lo + hi) / 2.0;
    } else {
      lo = mid;
      mid = std::isinf(hi) ? mid * 2.0 : (lo + hi) / 2.0;
    }
  }
  return out;
}

SparseMatrix fuzzy_neighbor_graph(const KnnGraph& knn) {
  const double target = std::log2(static_cast<double>(knn.k));
  std::vector<Triplet> directed;
  directed.reserve(knn.n * knn.k);
  for (std::size_t i = 0; i < knn.n; ++i) {
    auto dist = knn.neighbor_distances(i);
    auto nbr = knn.neighbors(i);
    const Bandwidth bw = calibrate_bandwidth(dist, target);
    for (std::size_t q = 0; q < knn.k; ++q) {
      const double gap = std::max(0.0, dist[q] - bw.rho);
      const double w = gap == 0.0 ? 1.0 : std::exp(-gap / bw.sigma);
      directed.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(nbr[q]), w});
    }
  }
  const SparseMatrix p = SparseMatrix::from_triplets(knn.n, knn.n, std::move(directed));

  auto has_entry = [&](std::size_t r, std::size_t c) {
    auto idx = p.row_indices(r);
    return std::binary_search(idx.begin(), idx.end(), static_cast<std::uint32_t>(c));
  };
  std::vector<Triplet> sym;
  for (std::size_t i = 0; i < knn.n; ++i) {
    auto idx = p.row_indices(i);
    auto val = p.row_values(i);
    for (std::size_t q = 0; q < idx.size(); ++q) {
      const std::size_t j = idx[q];
      const double a = val[q];
      const bool reverse = has_entry(j, i);
      const double b = reverse ? p.at(j, i) : 0.0;
      const double w = a + b - a * b;
      sym.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), w});
      if (!reverse) sym.push_back({static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(i), w});
    }
  }
  return SparseMatrix::from_triplets(knn.n, knn.n, std::move(sym));
}

namespace {

struct LayoutEdge {
  std::size_t head;
  std::size_t tail;
  double epochs_per_sample;
};

double clip(double v) { return std::clamp(v, -4.0, 4.0); }

DenseMatrix<double> optimize_layout(const SparseMatrix& graph, const ReducerParams& params) {
  const std::size_t n = graph.rows();
  const std::size_t dim = params.out_dim;
  const double a = params.curve_a;
  const double b = params.curve_b;

  Rng rng(mix_seed(params.seed, 0x6c61796f7574));
  DenseMatrix<double> emb(n, dim);
  for (double& v : emb.data()) v = rng.uniform(-10.0, 10.0);

  double max_w = 0.0;
  for (double w : graph.values()) max_w = std::max(max_w, w);
  if (max_w <= 0.0) return emb;
  std::vector<LayoutEdge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    auto idx = graph.row_indices(i);
    auto val = graph.row_values(i);
    for (std::size_t q = 0; q < idx.size(); ++q) {
      if (val[q] < max_w / static_cast<double>(params.epochs) || val[q] <= 0.0) continue;
      edges.push_back({i, idx[q], max_w / val[q]});
    }
  }
  const double neg_rate = static_cast<double>(std::max<std::size_t>(1, params.negative_sample_rate));
  std::vector<double> per_negative(edges.size());
  std::vector<double> next_sample(edges.size());
  std::vector<double> next_negative(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    per_negative[e] = edges[e].epochs_per_sample / neg_rate;
    next_sample[e] = edges[e].epochs_per_sample;
    next_negative[e] = per_negative[e];
  }

  const bool sample_negatives = params.negative_sample_rate > 0;
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    const double alpha = params.learning_rate * (1.0 - static_cast<double>(epoch) / static_cast<double>(params.epochs));
    const double now = static_cast<double>(epoch);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (next_sample[e] > now) continue;
      auto current = emb.row(edges[e].head);
      auto other = emb.row(edges[e].tail);
      double dist2 = 0.0;
      for (std::size_t d = 0; d < dim; ++d) dist2 += (current[d] - other[d]) * (current[d] - other[d]);
      if (dist2 > 0.0) {
        const double coeff = -2.0 * a * b * std::pow(dist2, b - 1.0) / (a * std::pow(dist2, b) + 1.0);
        for (std::size_t d = 0; d < dim; ++d) {
          const double g = clip(coeff * (current[d] - other[d]));
          current[d] += g * alpha;
          other[d] -= g * alpha;
        }
      }
      next_sample[e] += edges[e].epochs_per_sample;
      if (!sample_negatives) continue;

      const auto n_neg = static_cast<std::size_t>(std::max(0.0, (now - next_negative[e]) / per_negative[e]));
      for (std::size_t s = 0; s < n_neg; ++s) {
        const std::size_t k = rng.below(n);
        if (k == edges[e].head) continue;
        auto neg = emb.row(k);
        double nd2 = 0.0;
        for (std::size_t d = 0; d < dim; ++d) nd2 += (current[d] - neg[d]) * (current[d] - neg[d]);
        if (nd2 > 0.0) {
          const double coeff = 2.0 * b / ((0.001 + nd2) * (a * std::pow(nd2, b) + 1.0));
          for (std::size_t d = 0; d < dim; ++d) current[d] += clip(coeff * (current[d] - neg[d])) * alpha;
        } else {
          for (std::size_t d = 0; d < dim; ++d) current[d] += 4.0 * alpha;
        }
      }
      next_negative[e] += static_cast<double>(n_neg) * per_negative[e];
    }
  }
  return emb;
}

}  // namespace

ReducedEmbedding umap_reduce(const DenseMatrix<double>& x, const ReducerParams& params) {
  params.validate();
  const std::size_t n = x.rows();
  if (n <= params.n_neighbors)
    throw ValidationError("UMAP needs more rows (" + std::to_string(n) + ") than n_neighbors (" +
                          std::to_string(params.n_neighbors) + "); lower n_neighbors");
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw ValidationError("UMAP input contains non-finite values");
  }

  // Map each row to its unique representative.
  std::vector<std::size_t> row_to_unique(n);
  std::vector<std::size_t> unique_rows;
  if (params.unique_rows) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto less = [&](std::size_t i, std::size_t j) {
      auto ri = x.row(i);
      auto rj = x.row(j);
      return std::lexicographical_compare(ri.begin(), ri.end(), rj.begin(), rj.end());
    };
    std::stable_sort(order.begin(), order.end(), less);
    std::vector<std::size_t> group_first(n);
    for (std::size_t q = 0; q < n; ++q) {
      const bool same = q > 0 && !less(order[q - 1], order[q]) && !less(order[q], order[q - 1]);
      group_first[order[q]] = same ? group_first[order[q - 1]] : order[q];
    }
    std::map<std::size_t, std::size_t> first_to_unique;
    for (std::size_t i = 0; i < n; ++i) {
      auto [it, inserted] = first_to_unique.emplace(group_first[i], unique_rows.size());
      if (inserted) unique_rows.push_back(i);
      row_to_unique[i] = it->second;
    }
  } else {
    unique_rows.resize(n);
    std::iota(unique_rows.begin(), unique_rows.end(), 0);
    std::iota(row_to_unique.begin(), row_to_unique.end(), 0);
  }

  ReducedEmbedding out;
  out.method = ReductionMethod::umap;
  out.params = params;
  out.data = DenseMatrix<double>(n, params.out_dim, 0.0);
  const std::size_t m = unique_rows.size();
  if (m < 2) return out;

  DenseMatrix<double> ux(m, x.cols());
  for (std::size_t u = 0; u < m; ++u) {
    auto src = x.row(unique_rows[u]);
    std::copy(src.begin(), src.end(), ux.row(u).begin());
  }
  const std::size_t k = std::min(params.n_neighbors, m - 1);
  const SparseMatrix graph = fuzzy_neighbor_graph(exact_knn_cosine(ux, k));
  const DenseMatrix<double> layout = optimize_layout(graph, params);
  for (std::size_t i = 0; i < n; ++i) {
    auto src = layout.row(row_to_unique[i]);
    std::copy(src.begin(), src.end(), out.data.row(i).begin());
  }
  return out;
}

ReducedEmbedding umap_reduce(const EmbeddingMatrix& x, const ReducerParams& params) {
  return umap_reduce(to_double(x.values), params);
}

}  // namespace topicforge
