#include "topicforge/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "topicforge/errors.hpp"
#include "topicforge/parallel.hpp"
#include "topicforge/random.hpp"

namespace topicforge {

namespace {

double squared_euclidean(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double euclidean(std::span<const double> a, std::span<const double> b) { return std::sqrt(squared_euclidean(a, b)); }

double lambda_of(double distance) { return distance > 0.0 ? std::min(1.0 / distance, kMaxLambda) : kMaxLambda; }

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // Attaches b's set under a's root.
  void unite(std::size_t a, std::size_t b) { parent_[find(b)] = find(a); }

 private:
  std::vector<std::size_t> parent_;
};

// Children lists of the condensed tree keyed by node id.
std::map<std::size_t, std::vector<const CondensedTreeEdge*>> children_of(const CondensedTree& tree) {
  std::map<std::size_t, std::vector<const CondensedTreeEdge*>> out;
  for (const auto& e : tree.edges) out[e.parent].push_back(&e);
  return out;
}

}  // namespace

std::size_t ClusterAssignment::outlier_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kOutlierLabel));
}

ClusterAssignment ClusterAssignment::from_labels(std::vector<int> labels, std::vector<double> probabilities) {
  if (probabilities.size() != labels.size()) throw ValidationError("labels and probabilities differ in length");
  ClusterAssignment a;
  int max_label = -1;
  for (int l : labels) {
    if (l < kOutlierLabel) throw ValidationError("cluster labels must be -1 or non-negative");
    max_label = std::max(max_label, l);
  }
  a.K = static_cast<std::size_t>(max_label + 1);
  a.cluster_sizes.assign(a.K, 0);
  for (int l : labels) {
    if (l >= 0) ++a.cluster_sizes[static_cast<std::size_t>(l)];
  }
  for (std::size_t c = 0; c < a.K; ++c) {
    if (a.cluster_sizes[c] == 0) throw ValidationError("cluster " + std::to_string(c) + " is empty");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == kOutlierLabel) probabilities[i] = 0.0;
  }
  a.labels = std::move(labels);
  a.probabilities = std::move(probabilities);
  return a;
}

void HdbscanParams::validate() const {
  if (min_cluster_size < 2) throw ValidationError("min_cluster_size must be at least 2");
  if (min_samples && *min_samples < 1) throw ValidationError("min_samples must be at least 1");
}

std::vector<double> core_distances(const DenseMatrix<double>& x, std::size_t min_samples) {
  const std::size_t n = x.rows();
  std::vector<double> core(n, 0.0);
  if (n < 2 || min_samples == 0) return core;
  const std::size_t k = std::min(min_samples, n - 1);
  parallel_for(n, [&](std::size_t i) {
    std::vector<double> d;
    d.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) d.push_back(squared_euclidean(x.row(i), x.row(j)));
    }
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k - 1), d.end());
    core[i] = std::sqrt(d[k - 1]);
  }, 16);
  return core;
}

double mutual_reachability(const DenseMatrix<double>& x, std::span<const double> core, std::size_t a, std::size_t b) {
  if (a == b) return 0.0;
  return std::max({core[a], core[b], euclidean(x.row(a), x.row(b))});
}

std::vector<MstEdge> mutual_reachability_mst(const DenseMatrix<double>& x, std::span<const double> core) {
  const std::size_t n = x.rows();
  std::vector<MstEdge> mst;
  if (n < 2) return mst;
  mst.reserve(n - 1);
  std::vector<bool> in_tree(n, false);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> from(n, 0);
  std::size_t current = 0;
  in_tree[0] = true;
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t next = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      const double d = mutual_reachability(x, core, current, v);
      if (d < best[v]) {
        best[v] = d;
        from[v] = current;
      }
      if (next == n || best[v] < best[next]) next = v;
    }
    in_tree[next] = true;
    mst.push_back({from[next], next, best[next]});
    current = next;
  }
  return mst;
}

std::vector<LinkageStep> single_linkage(std::vector<MstEdge> mst, std::size_t num_points) {
  if (num_points > 0 && mst.size() != num_points - 1) throw ValidationError("spanning tree has the wrong edge count");
  std::stable_sort(mst.begin(), mst.end(), [](const MstEdge& p, const MstEdge& q) {
    const auto pk = std::make_tuple(p.weight, std::min(p.a, p.b), std::max(p.a, p.b));
    const auto qk = std::make_tuple(q.weight, std::min(q.a, q.b), std::max(q.a, q.b));
    return pk < qk;
  });
  UnionFind uf(num_points);
  std::vector<std::size_t> node_of(num_points);
  std::iota(node_of.begin(), node_of.end(), 0);
  std::vector<std::size_t> size_of(num_points, 1);
  std::vector<LinkageStep> steps;
  steps.reserve(mst.size());
  for (const auto& e : mst) {
    const std::size_t ra = uf.find(e.a);
    const std::size_t rb = uf.find(e.b);
    if (ra == rb) throw ValidationError("spanning tree contains a cycle");
    const std::size_t na = node_of[ra];
    const std::size_t nb = node_of[rb];
    LinkageStep s{std::min(na, nb), std::max(na, nb), e.weight, size_of[ra] + size_of[rb]};
    uf.unite(ra, rb);
    node_of[ra] = num_points + steps.size();
    size_of[ra] = s.size;
    steps.push_back(s);
  }
  return steps;
}

CondensedTree condense_tree(const std::vector<LinkageStep>& linkage, std::size_t num_points,
                            std::size_t min_cluster_size) {
  CondensedTree tree;
  tree.num_points = num_points;
  tree.num_clusters = 1;
  if (num_points < 2) return tree;

  const std::size_t root = 2 * num_points - 2;
  auto size_of = [&](std::size_t node) { return node < num_points ? std::size_t{1} : linkage[node - num_points].size; };
  auto leaves_under = [&](std::size_t node, auto&& visit) {
    std::vector<std::size_t> stack{node};
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      if (cur < num_points) {
        visit(cur);
      } else {
        stack.push_back(linkage[cur - num_points].right);
        stack.push_back(linkage[cur - num_points].left);
      }
    }
  };

  std::vector<std::size_t> relabel(root + 1, 0);
  relabel[root] = num_points;
  std::size_t next_label = num_points + 1;
  std::vector<std::size_t> queue{root};
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::size_t node = queue[head];
    const auto& step = linkage[node - num_points];
    const double lambda = lambda_of(step.distance);
    const std::size_t parent = relabel[node];
    const std::size_t left_size = size_of(step.left);
    const std::size_t right_size = size_of(step.right);
    const bool left_big = left_size >= min_cluster_size;
    const bool right_big = right_size >= min_cluster_size;

    auto shed = [&](std::size_t sub) {
      leaves_under(sub, [&](std::size_t p) { tree.edges.push_back({parent, p, lambda, 1}); });
    };
    auto keep = [&](std::size_t sub, std::size_t label) {
      relabel[sub] = label;
      if (sub >= num_points) queue.push_back(sub);
    };

    if (left_big && right_big) {
      for (std::size_t sub : {step.left, step.right}) {
        const std::size_t label = next_label++;
        tree.edges.push_back({parent, label, lambda, size_of(sub)});
        keep(sub, label);
      }
    } else if (!left_big && !right_big) {
      shed(step.left);
      shed(step.right);
    } else if (left_big) {
      shed(step.right);
      keep(step.left, parent);
    } else {
      shed(step.left);
      keep(step.right, parent);
    }
  }
  tree.num_clusters = next_label - num_points;
  return tree;
}

ClusterAssignment extract_clusters(CondensedTree& tree) {
  const std::size_t n = tree.num_points;
  const std::size_t root = tree.root();
  const std::size_t nc = tree.num_clusters;
  auto cid = [&](std::size_t node) { return node - n; };

  std::vector<double> birth(nc, 0.0);
  std::vector<std::size_t> parent_of(n + nc, root);
  for (const auto& e : tree.edges) {
    parent_of[e.child] = e.parent;
    if (e.child >= n) birth[cid(e.child)] = e.lambda;
  }
  tree.stability.assign(nc, 0.0);
  for (const auto& e : tree.edges) {
    tree.stability[cid(e.parent)] += (e.lambda - birth[cid(e.parent)]) * static_cast<double>(e.child_size);
  }

  std::vector<std::vector<std::size_t>> child_clusters(nc);
  for (const auto& e : tree.edges) {
    if (e.child >= n) child_clusters[cid(e.parent)].push_back(e.child);
  }

  // Excess of mass, leaves first. The root is not a candidate.
  std::vector<bool> is_cluster(nc, true);
  is_cluster[0] = false;
  std::vector<double> subtree_best = tree.stability;
  for (std::size_t c = nc; c-- > 1;) {
    double children = 0.0;
    for (std::size_t ch : child_clusters[c]) children += subtree_best[cid(ch)];
    if (!child_clusters[c].empty() && children > subtree_best[c]) {
      is_cluster[c] = false;
      subtree_best[c] = children;
    } else {
      std::vector<std::size_t> stack(child_clusters[c].begin(), child_clusters[c].end());
      while (!stack.empty()) {
        const std::size_t d = stack.back();
        stack.pop_back();
        is_cluster[cid(d)] = false;
        stack.insert(stack.end(), child_clusters[cid(d)].begin(), child_clusters[cid(d)].end());
      }
    }
  }

  tree.selected.clear();
  for (std::size_t c = 1; c < nc; ++c) {
    if (is_cluster[c]) tree.selected.push_back(n + c);
  }
  if (tree.selected.empty()) {
    // A root without sub-clusters whose points all leave at one density level
    // is a single uniform cluster.
    bool uniform = !tree.edges.empty();
    for (const auto& e : tree.edges) uniform = uniform && e.lambda == tree.edges.front().lambda;
    if (uniform && nc == 1) tree.selected.push_back(root);
  }

  std::vector<int> label_of_cluster(nc, kOutlierLabel);
  for (std::size_t k = 0; k < tree.selected.size(); ++k) label_of_cluster[cid(tree.selected[k])] = static_cast<int>(k);

  std::vector<int> labels(n, kOutlierLabel);
  std::vector<double> point_lambda(n, 0.0);
  for (const auto& e : tree.edges) {
    if (e.child < n) point_lambda[e.child] = e.lambda;
  }
  // Normalizer: the largest lambda among a selected cluster's direct children
  // (its death). Points that persist into sub-clusters are capped at it.
  std::vector<double> max_lambda(tree.selected.size(), 0.0);
  for (const auto& e : tree.edges) {
    const int k = label_of_cluster[cid(e.parent)];
    if (k != kOutlierLabel) max_lambda[static_cast<std::size_t>(k)] = std::max(max_lambda[static_cast<std::size_t>(k)], e.lambda);
  }
  for (std::size_t p = 0; p < n; ++p) {
    std::size_t c = parent_of[p];
    while (true) {
      if (label_of_cluster[cid(c)] != kOutlierLabel) {
        labels[p] = label_of_cluster[cid(c)];
        break;
      }
      if (c == root) break;
      c = parent_of[c];
    }
  }
  std::vector<double> probs(n, 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    if (labels[p] == kOutlierLabel) continue;
    const double m = max_lambda[static_cast<std::size_t>(labels[p])];
    probs[p] = m > 0.0 ? std::min(point_lambda[p], m) / m : 1.0;
  }
  return ClusterAssignment::from_labels(std::move(labels), std::move(probs));
}

HdbscanResult hdbscan_fit(const DenseMatrix<double>& x, const HdbscanParams& params) {
  params.validate();
  const std::size_t n = x.rows();
  if (n < params.min_cluster_size)
    throw ValidationError("HDBSCAN needs at least min_cluster_size (" + std::to_string(params.min_cluster_size) +
                          ") points, got " + std::to_string(n));
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw ValidationError("clustering input contains non-finite values");
  }
  HdbscanResult r;
  r.core_distances = core_distances(x, params.resolved_min_samples());
  r.mst = mutual_reachability_mst(x, r.core_distances);
  r.tree = condense_tree(single_linkage(r.mst, n), n, params.min_cluster_size);
  r.assignment = extract_clusters(r.tree);
  return r;
}

HdbscanResult hdbscan_fit(const ReducedEmbedding& x, const HdbscanParams& params) { return hdbscan_fit(x.data, params); }

std::vector<std::vector<std::size_t>> cluster_exemplars(const CondensedTree& tree) {
  const std::size_t n = tree.num_points;
  const auto children = children_of(tree);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t selected : tree.selected) {
    std::vector<std::size_t> exemplars;
    std::vector<std::size_t> stack{selected};
    while (!stack.empty()) {
      const std::size_t c = stack.back();
      stack.pop_back();
      auto it = children.find(c);
      if (it == children.end()) continue;
      bool leaf = true;
      double top = 0.0;
      for (const auto* e : it->second) {
        if (e->child >= n) {
          leaf = false;
          stack.push_back(e->child);
        } else {
          top = std::max(top, e->lambda);
        }
      }
      if (!leaf) continue;
      for (const auto* e : it->second) {
        if (e->child < n && e->lambda == top) exemplars.push_back(e->child);
      }
    }
    std::sort(exemplars.begin(), exemplars.end());
    out.push_back(std::move(exemplars));
  }
  return out;
}

DenseMatrix<double> soft_memberships(const ClusterAssignment& assignment, const CondensedTree& tree,
                                     const DenseMatrix<double>& x) {
  const std::size_t k = assignment.K;
  if (k == 0) throw ValidationError("soft memberships need at least one cluster");
  if (x.rows() != assignment.size()) throw ValidationError("points do not match the assignment");
  const auto exemplars = cluster_exemplars(tree);
  if (exemplars.size() != k) throw ValidationError("condensed tree does not match the assignment");

  DenseMatrix<double> out(x.rows(), k, 0.0);
  parallel_for(x.rows(), [&](std::size_t i) {
    std::vector<double> dist(k, std::numeric_limits<double>::infinity());
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t e : exemplars[c]) dist[c] = std::min(dist[c], euclidean(x.row(i), x.row(e)));
    }
    auto row = out.row(i);
    const bool any_zero = std::any_of(dist.begin(), dist.end(), [](double d) { return d == 0.0; });
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      row[c] = any_zero ? (dist[c] == 0.0 ? 1.0 : 0.0) : 1.0 / dist[c];
      total += row[c];
    }
    for (auto& v : row) v /= total;
    const int label = assignment.labels[i];
    if (label != kOutlierLabel) {
      auto top = std::max_element(row.begin(), row.end());
      auto own = row.begin() + label;
      if (*top > *own) std::iter_swap(top, own);
    }
  }, 64);
  return out;
}

DenseMatrix<double> soft_memberships(const ClusterAssignment& assignment, const CondensedTree& tree,
                                     const ReducedEmbedding& x) {
  return soft_memberships(assignment, tree, x.data);
}

KMeansResult kmeans_fit(const DenseMatrix<double>& x, std::size_t k, std::uint64_t seed) {
  const std::size_t n = x.rows();
  const std::size_t dim = x.cols();
  if (k < 1) throw ValidationError("k must be at least 1");
  if (k > n) throw ValidationError("k (" + std::to_string(k) + ") exceeds the number of points (" + std::to_string(n) + ")");

  Rng rng(mix_seed(seed, 0x6b6d65616e73));
  KMeansResult r;
  r.centroids = DenseMatrix<double>(k, dim);
  std::vector<bool> chosen(n, false);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t first = rng.below(n);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t pick = first;
    if (c > 0) {
      double total = 0.0;
      for (double v : d2) total += v;
      if (total > 0.0) {
        double target = rng.uniform() * total;
        pick = n;
        for (std::size_t i = 0; i < n; ++i) {
          if (d2[i] <= 0.0) continue;
          pick = i;
          target -= d2[i];
          if (target < 0.0) break;
        }
      } else {
        pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
      }
    }
    chosen[pick] = true;
    std::copy(x.row(pick).begin(), x.row(pick).end(), r.centroids.row(c).begin());
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_euclidean(x.row(i), x.row(pick)));
  }

  std::vector<std::size_t> assign(n, 0);
  auto assign_all = [&] {
    parallel_for(n, [&](std::size_t i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_euclidean(x.row(i), r.centroids.row(c));
        if (d < best) {
          best = d;
          assign[i] = c;
        }
      }
    }, 256);
  };

  for (r.iterations = 1; r.iterations <= kKMeansMaxIterations; ++r.iterations) {
    assign_all();
    DenseMatrix<double> next(k, dim, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[assign[i]];
      auto row = next.row(assign[i]);
      for (std::size_t j = 0; j < dim; ++j) row[j] += x(i, j);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Re-seed an empty cluster at the point farthest from its centroid.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = squared_euclidean(x.row(i), r.centroids.row(assign[i]));
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        std::copy(x.row(far).begin(), x.row(far).end(), next.row(c).begin());
        continue;
      }
      for (auto& v : next.row(c)) v /= static_cast<double>(counts[c]);
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) shift = std::max(shift, std::sqrt(squared_euclidean(next.row(c), r.centroids.row(c))));
    r.centroids = std::move(next);
    if (shift < kKMeansTolerance) break;
  }
  r.iterations = std::min(r.iterations, kKMeansMaxIterations);
  assign_all();

  // Compact labels in case a cluster ended up empty.
  std::vector<int> remap(k, -1);
  int next_label = 0;
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < n; ++i) ++counts[assign[i]];
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] > 0) remap[c] = next_label++;
  }
  std::vector<int> labels(n);
  r.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = remap[assign[i]];
    r.inertia += squared_euclidean(x.row(i), r.centroids.row(assign[i]));
  }
  if (next_label != static_cast<int>(k)) {
    DenseMatrix<double> kept(static_cast<std::size_t>(next_label), dim);
    for (std::size_t c = 0; c < k; ++c) {
      if (remap[c] >= 0) std::copy(r.centroids.row(c).begin(), r.centroids.row(c).end(), kept.row(static_cast<std::size_t>(remap[c])).begin());
    }
    r.centroids = std::move(kept);
  }
  r.assignment = ClusterAssignment::from_labels(std::move(labels), std::vector<double>(n, 1.0));
  return r;
}

KMeansResult kmeans_fit(const ReducedEmbedding& x, std::size_t k, std::uint64_t seed) { return kmeans_fit(x.data, k, seed); }

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw ValidationError("labelings differ in length");
  const double n = static_cast<double>(a.size());
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    ra[a[i]] += 1.0;
    rb[b[i]] += 1.0;
  }
  auto pairs = [](double m) { return m * (m - 1.0) / 2.0; };
  double index = 0.0, sa = 0.0, sb = 0.0;
  for (const auto& [key, v] : joint) index += pairs(v);
  for (const auto& [key, v] : ra) sa += pairs(v);
  for (const auto& [key, v] : rb) sb += pairs(v);
  const double expected = n > 1 ? sa * sb / pairs(n) : 0.0;
  const double max_index = (sa + sb) / 2.0;
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace topicforge
