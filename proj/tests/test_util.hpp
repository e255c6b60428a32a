#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "topicforge/clustering.hpp"
#include "topicforge/corpus.hpp"
#include "topicforge/matrix.hpp"
#include "topicforge/random.hpp"

namespace tf_test {

namespace fs = std::filesystem;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("topicforge_" + tag + "_" + std::to_string(::getpid()) + "_" +
                                         std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

inline topicforge::Document doc(std::string id, std::vector<std::string> tokens,
                                std::optional<std::int64_t> ts = std::nullopt) {
  topicforge::Document d;
  d.id = std::move(id);
  d.tokens = std::move(tokens);
  for (const auto& t : d.tokens) d.raw_text += (d.raw_text.empty() ? "" : " ") + t;
  d.timestamp = ts;
  return d;
}

// Tokenized corpus, one document per token list, ids d0, d1, ...
inline topicforge::Corpus token_corpus(const std::vector<std::vector<std::string>>& docs) {
  std::vector<topicforge::Document> out;
  for (std::size_t i = 0; i < docs.size(); ++i) out.push_back(doc("d" + std::to_string(i), docs[i]));
  return topicforge::Corpus(std::move(out));
}

struct Blobs {
  topicforge::DenseMatrix<double> points;
  std::vector<int> labels;
};

// Isotropic Gaussian blobs with the given spread around centers spaced `separation` apart on axis 0.
inline Blobs make_blobs(std::size_t per_blob, std::size_t blobs, std::size_t dim, double spread, double separation,
                        std::uint64_t seed) {
  topicforge::Rng rng(seed);
  Blobs b{topicforge::DenseMatrix<double>(per_blob * blobs, dim), {}};
  for (std::size_t c = 0; c < blobs; ++c) {
    for (std::size_t i = 0; i < per_blob; ++i) {
      const std::size_t r = c * per_blob + i;
      for (std::size_t j = 0; j < dim; ++j) b.points(r, j) = spread * rng.normal();
      b.points(r, 0) += separation * static_cast<double>(c);
      b.labels.push_back(static_cast<int>(c));
    }
  }
  return b;
}

inline double euclid(const topicforge::DenseMatrix<double>& x, std::size_t a, std::size_t b) {
  double s = 0.0;
  for (std::size_t j = 0; j < x.cols(); ++j) s += (x(a, j) - x(b, j)) * (x(a, j) - x(b, j));
  return std::sqrt(s);
}

// Kruskal over the full mutual-reachability graph with a plain union-find.
inline double kruskal_mst_weight(const topicforge::DenseMatrix<double>& x, const std::vector<double>& core) {
  const std::size_t n = x.rows();
  struct E {
    double w;
    std::size_t a, b;
  };
  std::vector<E> edges;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      edges.push_back({std::max({euclid(x, a, b), core[a], core[b]}), a, b});
  std::sort(edges.begin(), edges.end(), [](const E& l, const E& r) { return l.w < r.w; });
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  double total = 0.0;
  for (const auto& e : edges) {
    const auto ra = find(e.a), rb = find(e.b);
    if (ra == rb) continue;
    parent[ra] = rb;
    total += e.w;
  }
  return total;
}

// Brute-force core distance: k-th smallest distance to another point.
inline std::vector<double> brute_core(const topicforge::DenseMatrix<double>& x, std::size_t k) {
  const std::size_t n = x.rows();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> d;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) d.push_back(euclid(x, i, j));
    std::sort(d.begin(), d.end());
    out[i] = d.empty() ? 0.0 : d[std::min(k, d.size()) - 1];
  }
  return out;
}

// Random corpus over terms t000..t{V-1}.
inline topicforge::Corpus random_corpus(std::mt19937_64& gen, std::size_t docs, std::size_t vocab,
                                        std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(1, max_len), term(0, vocab - 1);
  std::vector<std::vector<std::string>> out;
  for (std::size_t d = 0; d < docs; ++d) {
    std::vector<std::string> toks;
    const std::size_t l = len(gen);
    for (std::size_t i = 0; i < l; ++i) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "t%03zu", term(gen));
      toks.emplace_back(buf);
    }
    out.push_back(std::move(toks));
  }
  return token_corpus(out);
}

}  // namespace tf_test
