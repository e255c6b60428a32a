#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"
#include "topicforge/reduction.hpp"

using namespace topicforge;

namespace {

// Cyclic Jacobi rotations on a symmetric matrix; returns eigenvalues descending.
std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

DenseMatrix<double> random_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  DenseMatrix<double> m(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = nd(gen) * static_cast<double>(j + 1);
  return m;
}

}  // namespace

TEST(Pca, CollinearPoints) {
  const DenseMatrix<double> x(3, 2, std::vector<double>{0, 0, 1, 1, 2, 2});
  const PcaFit fit = pca_fit(x, 1);
  const double r2 = std::sqrt(2.0);
  const double sign = fit.projection(0, 0) < 0 ? 1.0 : -1.0;
  EXPECT_NEAR(fit.projection(0, 0), -r2 * sign, 1e-12);
  EXPECT_NEAR(fit.projection(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(fit.projection(2, 0), r2 * sign, 1e-12);
}

TEST(Pca, CompleteBasisReconstructs) {
  const DenseMatrix<double> x = random_matrix(30, 6, 1);
  const PcaFit fit = pca_fit(x, 6);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < 6; ++c) s += fit.projection(i, c) * fit.components(c, j);
      EXPECT_NEAR(s, x(i, j) - fit.mean[j], 1e-6);
    }
  }
}

TEST(Pca, VarianceMatchesJacobiOracle) {
  const std::size_t n = 50, d = 10;
  const DenseMatrix<double> x = random_matrix(n, d, 2);
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j) / n;
  std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) cov[a][b] += (x(i, a) - mean[a]) * (x(i, b) - mean[b]) / (n - 1);
  const auto oracle = jacobi_eigenvalues(cov);

  const PcaFit fit = pca_fit(x, d);
  for (std::size_t c = 0; c < d; ++c) {
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += fit.projection(i, c) * fit.projection(i, c) / (n - 1);
    EXPECT_NEAR(var, oracle[c], 1e-6) << c;
    EXPECT_NEAR(fit.eigenvalues[c], oracle[c], 1e-6) << c;
  }
}

TEST(Pca, RowOrderInvariantUpToSign) {
  const DenseMatrix<double> x = random_matrix(40, 5, 3);
  DenseMatrix<double> rev(40, 5);
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t j = 0; j < 5; ++j) rev(39 - i, j) = x(i, j);
  const PcaFit a = pca_fit(x, 3), b = pca_fit(rev, 3);
  for (std::size_t c = 0; c < 3; ++c) {
    const double s = a.projection(0, c) * b.projection(39, c) < 0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < 40; ++i) EXPECT_NEAR(a.projection(i, c), s * b.projection(39 - i, c), 1e-9);
  }
}

TEST(Pca, RejectsBadShapes) {
  EXPECT_THROW(pca_fit(random_matrix(1, 3, 1), 1), ValidationError);
  EXPECT_THROW(pca_fit(random_matrix(5, 3, 1), 4), ValidationError);
}

TEST(Umap, BandwidthSearchHitsTarget) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.05, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> d(15);
    for (auto& v : d) v = u(gen);
    std::sort(d.begin(), d.end());
    const double target = std::log2(15.0);
    const Bandwidth bw = calibrate_bandwidth(d, target);
    EXPECT_TRUE(std::abs(bw.membership_sum - target) < 1e-5 || bw.iterations == kBandwidthMaxIterations);
    double s = 0.0;
    for (double v : d) s += std::exp(-std::max(0.0, v - bw.rho) / bw.sigma);
    EXPECT_NEAR(s, bw.membership_sum, 1e-12);
    EXPECT_EQ(bw.rho, d.front());
  }
}

TEST(Umap, FuzzyGraphIsSymmetric) {
  const auto blobs = tf_test::make_blobs(15, 2, 4, 1.0, 10.0, 3);
  const SparseMatrix g = fuzzy_neighbor_graph(exact_knn_cosine(blobs.points, 5));
  for (const auto& t : g.triplets()) {
    EXPECT_DOUBLE_EQ(t.value, g.at(t.col, t.row));
    EXPECT_GT(t.value, 0.0);
    EXPECT_LE(t.value, 1.0);
  }
}

namespace {

// Points spread on a sphere cap around two opposite directions, so cosine
// geometry separates them.
DenseMatrix<double> two_direction_blobs(std::vector<int>& labels) {
  auto b = tf_test::make_blobs(20, 2, 8, 0.3, 0.0, 21);
  for (std::size_t i = 0; i < b.points.rows(); ++i) b.points(i, 0) += b.labels[i] == 0 ? 3.0 : -3.0;
  labels = b.labels;
  return b.points;
}

}  // namespace

TEST(Umap, NeighborhoodsStayWithinBlob) {
  std::vector<int> labels;
  const DenseMatrix<double> x = two_direction_blobs(labels);
  ReducerParams p;
  p.n_neighbors = 10;
  p.out_dim = 2;
  const ReducedEmbedding r = umap_reduce(x, p);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t j = 0; j < x.rows(); ++j)
      if (j != i) d.push_back({tf_test::euclid(r.data, i, j), j});
    std::sort(d.begin(), d.end());
    for (std::size_t q = 0; q < 5; ++q) EXPECT_EQ(labels[d[q].second], labels[i]) << i;
  }
}

TEST(Umap, DuplicateRowsCoincide) {
  std::vector<int> labels;
  DenseMatrix<double> x = two_direction_blobs(labels);
  for (std::size_t j = 0; j < x.cols(); ++j) x(7, j) = x(3, j);
  ReducerParams p;
  p.n_neighbors = 8;
  const ReducedEmbedding r = umap_reduce(x, p);
  for (std::size_t j = 0; j < r.out_dim(); ++j) EXPECT_NEAR(r.data(7, j), r.data(3, j), 1e-3);
}

TEST(Umap, SameSeedBitIdentical) {
  std::vector<int> labels;
  const DenseMatrix<double> x = two_direction_blobs(labels);
  ReducerParams p;
  p.n_neighbors = 8;
  EXPECT_EQ(umap_reduce(x, p).data, umap_reduce(x, p).data);
  ReducerParams q = p;
  q.seed = 43;
  EXPECT_NE(umap_reduce(x, p).data, umap_reduce(x, q).data);
}

TEST(Umap, TooFewRowsAsksForSmallerNeighborhood) {
  const DenseMatrix<double> x = random_matrix(10, 4, 1);
  ReducerParams p;
  try {
    umap_reduce(x, p);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("n_neighbors"), std::string::npos);
  }
}

TEST(Knn, ExcludesSelfAndSortsByDistance) {
  const DenseMatrix<double> x = random_matrix(25, 3, 8);
  const KnnGraph g = exact_knn_cosine(x, 4);
  for (std::size_t i = 0; i < 25; ++i) {
    auto nb = g.neighbors(i);
    auto dd = g.neighbor_distances(i);
    EXPECT_TRUE(std::is_sorted(dd.begin(), dd.end()));
    for (std::size_t q = 0; q < 4; ++q) {
      EXPECT_NE(nb[q], i);
      EXPECT_NEAR(dd[q], cosine_distance(x.row(i), x.row(nb[q])), 1e-12);
    }
  }
}
