#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <spdlog/spdlog.h>

#include "ctfidf_oracle.hpp"
#include "test_util.hpp"
#include "topicforge/ctfidf.hpp"

using namespace topicforge;

namespace {

Corpus fruit() { return tf_test::token_corpus({{"apple", "apple", "banana"}, {"banana", "cherry"}}); }

ClusterAssignment labels(std::vector<int> l) {
  std::vector<double> p(l.size(), 1.0);
  return ClusterAssignment::from_labels(std::move(l), std::move(p));
}

double weight(const TopicModel& m, std::size_t c, const std::string& term) {
  return m.twm.weights.at(c, *m.vocab.index_of(term));
}

}  // namespace

TEST(Aggregate, HandCounts) {
  const Corpus c = fruit();
  const Vocabulary v = build_vocabulary(c);
  const ClassTermMatrix ctm = aggregate_classes(c, labels({0, 1}), v);
  EXPECT_EQ(ctm.K, 2u);
  EXPECT_EQ(ctm.tf.at(0, *v.index_of("apple")), 2.0);
  EXPECT_EQ(ctm.tf.at(0, *v.index_of("banana")), 1.0);
  EXPECT_EQ(ctm.tf.at(0, *v.index_of("cherry")), 0.0);
  EXPECT_EQ(ctm.tf.at(1, *v.index_of("banana")), 1.0);
  EXPECT_EQ(ctm.tf.at(1, *v.index_of("cherry")), 1.0);
  EXPECT_DOUBLE_EQ(ctm.average_class_words, 2.5);
}

TEST(Aggregate, SingleClassAndOutliers) {
  const Corpus c = tf_test::token_corpus({{"a", "b"}, {"a"}, {"z", "z"}});
  const Vocabulary v = build_vocabulary(c);
  const ClassTermMatrix one = aggregate_classes(c, labels({0, 0, -1}), v);
  EXPECT_EQ(one.tf.at(0, *v.index_of("a")), 2.0);
  EXPECT_DOUBLE_EQ(one.average_class_words, 3.0);
  EXPECT_EQ(one.outlier_tf[*v.index_of("z")], 2.0);
  EXPECT_EQ(one.tf_global[*v.index_of("z")], 0.0);
  EXPECT_THROW(aggregate_classes(c, labels({-1, -1, -1}), v), PipelineError);
}

TEST(Aggregate, DocumentOrderInvariant) {
  std::mt19937_64 gen(2);
  const Corpus c = tf_test::random_corpus(gen, 30, 40, 20);
  std::vector<int> l(30);
  for (std::size_t i = 0; i < 30; ++i) l[i] = static_cast<int>(i % 4);
  std::vector<Document> rev(c.documents().rbegin(), c.documents().rend());
  std::vector<int> lr(l.rbegin(), l.rend());
  const Vocabulary v = build_vocabulary(c);
  EXPECT_EQ(ctfidf_transform(aggregate_classes(c, labels(l), v)).weights,
            ctfidf_transform(aggregate_classes(Corpus(rev), labels(lr), v)).weights);
}

TEST(Ctfidf, HandValues) {
  const TopicModel m = build_topic_model(fruit(), labels({0, 1}), build_vocabulary(fruit()));
  EXPECT_NEAR(weight(m, 0, "apple"), 1.62186, 1e-5);
  EXPECT_NEAR(weight(m, 0, "banana"), 0.81093, 1e-5);
  EXPECT_NEAR(weight(m, 1, "banana"), 0.81093, 1e-5);
  EXPECT_NEAR(weight(m, 1, "cherry"), 1.25276, 1e-5);
  // values from the Python oracle script
  EXPECT_NEAR(weight(m, 0, "apple"), 1.621860432433, 1e-12);
  EXPECT_NEAR(weight(m, 1, "cherry"), 1.252762968495, 1e-12);
}

TEST(Ctfidf, MatchesScalarOracle) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 40; ++trial) {
    const int k = 2 + static_cast<int>(gen() % 7);
    const Corpus c = tf_test::random_corpus(gen, 10 + gen() % 41, 5 + gen() % 96, 25);
    std::vector<int> l(c.size());
    for (std::size_t i = 0; i < l.size(); ++i) l[i] = i < static_cast<std::size_t>(k) ? static_cast<int>(i) : static_cast<int>(gen() % (k + 1)) - 1;
    const Vocabulary v = build_vocabulary(c);
    const TopicWordMatrix twm = ctfidf_transform(aggregate_classes(c, labels(l), v));
    const auto oracle = tf_test::scalar_ctfidf(c, l, k);
    std::size_t nonzero = 0;
    for (std::size_t cls = 0; cls < static_cast<std::size_t>(k); ++cls) {
      for (std::size_t t = 0; t < v.size(); ++t) {
        auto it = oracle.find({static_cast<int>(cls), v.term(t)});
        const double expect = it == oracle.end() ? 0.0 : it->second;
        EXPECT_NEAR(twm.weights.at(cls, t), expect, 1e-12);
        EXPECT_GE(twm.weights.at(cls, t), 0.0);
        if (expect > 0) ++nonzero;
      }
    }
    EXPECT_EQ(nonzero, twm.weights.nnz());
  }
}

TEST(Ctfidf, UbiquitousTermHasLowestIdf) {
  const Corpus c = tf_test::token_corpus({{"x", "x", "x", "x", "a"}, {"x", "x", "x", "x", "b", "b"}, {"x", "x", "x", "x", "c"}});
  const Vocabulary v = build_vocabulary(c);
  const auto icf = inverse_class_frequency(aggregate_classes(c, labels({0, 1, 2}), v));
  const std::size_t x = *v.index_of("x");
  for (std::size_t t = 0; t < v.size(); ++t)
    if (t != x) EXPECT_LT(icf[x], icf[t]);
}

TEST(Ctfidf, LogBaseKeepsRanking) {
  std::mt19937_64 gen(8);
  const Corpus c = tf_test::random_corpus(gen, 40, 30, 15);
  std::vector<int> l(40);
  for (std::size_t i = 0; i < 40; ++i) l[i] = static_cast<int>(i % 3);
  const Vocabulary v = build_vocabulary(c);
  const ClassTermMatrix ctm = aggregate_classes(c, labels(l), v);
  CtfidfOptions b10;
  b10.log_base = 10.0;
  const auto ln_words = top_n_words(ctfidf_transform(ctm), v, 10);
  const auto log10_words = top_n_words(ctfidf_transform(ctm, b10), v, 10);
  for (std::size_t k = 0; k < 3; ++k) {
    ASSERT_EQ(ln_words[k].size(), log10_words[k].size());
    for (std::size_t i = 0; i < ln_words[k].size(); ++i) EXPECT_EQ(ln_words[k][i].term, log10_words[k][i].term);
  }
}

TEST(Ctfidf, OneDocumentPerClassStaysAgainstOracle) {
  const Corpus c = tf_test::token_corpus({{"a", "b", "b"}, {"a", "c"}, {"c", "d", "d", "d"}});
  const Vocabulary v = build_vocabulary(c);
  const TopicWordMatrix twm = ctfidf_transform(aggregate_classes(c, labels({0, 1, 2}), v));
  const auto oracle = tf_test::scalar_ctfidf(c, {0, 1, 2}, 3);
  for (const auto& [key, w] : oracle) EXPECT_NEAR(twm.weights.at(key.first, *v.index_of(key.second)), w, 1e-12);
}

TEST(ClassicTfidf, HandValues) {
  const Corpus c = tf_test::token_corpus({{"a", "b"}, {"a"}});
  const Vocabulary v = build_vocabulary(c);
  const SparseMatrix w = classic_tfidf(c, v);
  EXPECT_EQ(w.at(0, *v.index_of("a")), 0.0);
  EXPECT_NEAR(w.at(0, *v.index_of("b")), 0.69315, 1e-5);
  const Corpus doubled = tf_test::token_corpus({{"a", "b", "b"}, {"a"}});
  EXPECT_DOUBLE_EQ(classic_tfidf(doubled, v).at(0, *v.index_of("b")), 2.0 * w.at(0, *v.index_of("b")));
}

TEST(TopWords, OrderingAndTies) {
  const TopicModel m = build_topic_model(fruit(), labels({0, 1}), build_vocabulary(fruit()), 10);
  const auto one = top_n_words(m.twm, m.vocab, 1);
  ASSERT_EQ(one[0].size(), 1u);
  EXPECT_EQ(one[0][0].term, "apple");
  EXPECT_EQ(m.top_words[0].size(), 2u);
  EXPECT_EQ(m.top_words[0][1].term, "banana");
  EXPECT_EQ(m.top_words[1][0].term, "cherry");

  const Corpus tie = tf_test::token_corpus({{"zeta", "alpha"}, {"other"}});
  const TopicModel t = build_topic_model(tie, labels({0, 1}), build_vocabulary(tie), 5);
  ASSERT_EQ(t.top_words[0].size(), 2u);
  EXPECT_EQ(t.top_words[0][0].term, "alpha");
  EXPECT_EQ(t.top_words[0][1].term, "zeta");
}

namespace {

// Three topics with sizes 10, 5, 2; the size-2 topic shares its words with topic 1.
Corpus three_topics(std::vector<int>& l) {
  std::vector<std::vector<std::string>> docs;
  for (int i = 0; i < 10; ++i) docs.push_back({"space", "orbit", "rocket"}), l.push_back(0);
  for (int i = 0; i < 5; ++i) docs.push_back({"hockey", "puck", "goal"}), l.push_back(1);
  for (int i = 0; i < 2; ++i) docs.push_back({"hockey", "puck", "ice"}), l.push_back(2);
  docs.push_back({"noise", "words", "here"});
  l.push_back(-1);
  return tf_test::token_corpus(docs);
}

double brute_cosine(const SparseMatrix& m, std::size_t a, std::size_t b) {
  const auto x = m.dense_row(a), y = m.dense_row(b);
  double d = 0, nx = 0, ny = 0;
  for (std::size_t i = 0; i < x.size(); ++i) d += x[i] * y[i], nx += x[i] * x[i], ny += y[i] * y[i];
  return d / std::sqrt(nx * ny);
}

}  // namespace

TEST(ReduceTopics, IdentityAtCurrentK) {
  std::vector<int> l;
  const Corpus c = three_topics(l);
  const TopicModel m = build_topic_model(c, labels(l), build_vocabulary(c));
  const TopicModel r = reduce_topics(m, c, 3);
  EXPECT_EQ(r.twm.weights, m.twm.weights);
  EXPECT_EQ(r.assignment.labels, m.assignment.labels);
}

TEST(ReduceTopics, SmallestMergesIntoNearest) {
  std::vector<int> l;
  const Corpus c = three_topics(l);
  const TopicModel m = build_topic_model(c, labels(l), build_vocabulary(c));
  EXPECT_GT(brute_cosine(m.twm.weights, 2, 1), brute_cosine(m.twm.weights, 2, 0));
  EXPECT_EQ(pick_merge(m), std::make_pair(std::size_t{2}, std::size_t{1}));
  const TopicModel r = reduce_topics(m, c, 2);
  ASSERT_EQ(r.num_topics(), 2u);
  auto sizes = r.topic_sizes;
  std::sort(sizes.begin(), sizes.end());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{7, 10}));
  EXPECT_EQ(r.assignment.outlier_count(), 1u);
}

TEST(ReduceTopics, FullCollapseKeepsDocuments) {
  std::mt19937_64 gen(12);
  const Corpus c = tf_test::random_corpus(gen, 60, 50, 20);
  std::vector<int> l(60);
  for (std::size_t i = 0; i < 60; ++i) l[i] = i < 6 ? static_cast<int>(i) : static_cast<int>(gen() % 7) - 1;
  const TopicModel m = build_topic_model(c, labels(l), build_vocabulary(c));
  const std::size_t clustered = 60 - m.assignment.outlier_count();
  for (std::size_t k = m.num_topics(); k >= 1; --k) {
    const TopicModel r = reduce_topics(m, c, k);
    EXPECT_EQ(r.num_topics(), k);
    EXPECT_EQ(std::accumulate(r.topic_sizes.begin(), r.topic_sizes.end(), std::size_t{0}), clustered);
  }
  EXPECT_EQ(reduce_topics(m, c, 1).topic_sizes[0], clustered);
  EXPECT_THROW(reduce_topics(m, c, 0), ValidationError);
}

namespace {

std::vector<TermWeight> candidates(std::size_t n) {
  std::vector<TermWeight> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({"w" + std::to_string(i), 10.0 - static_cast<double>(i)});
  return out;
}

double fcos(const std::vector<float>& a, const std::vector<float>& b) {
  double d = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] * b[i], na += a[i] * a[i], nb += b[i] * b[i];
  return d / std::sqrt(na * nb);
}

// Each step re-scores every remaining candidate from scratch.
std::vector<std::string> greedy_oracle(const std::vector<TermWeight>& cand,
                                       const std::map<std::string, std::vector<float>>& vec, double lambda,
                                       std::size_t n) {
  double mx = 0;
  for (const auto& c : cand) mx = std::max(mx, c.weight);
  std::vector<std::size_t> chosen;
  std::vector<std::string> out;
  while (out.size() < std::min(n, cand.size())) {
    double best_score = -1e300;
    std::size_t best = 0;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
      double red = 0;
      for (std::size_t j : chosen) red = std::max(red, fcos(vec.at(cand[i].term), vec.at(cand[j].term)));
      const double rel = cand[i].weight / mx;
      const double s = chosen.empty() ? rel : lambda * rel - (1 - lambda) * red;
      if (s > best_score) best_score = s, best = i;
    }
    chosen.push_back(best);
    out.push_back(cand[best].term);
  }
  return out;
}

}  // namespace

TEST(Mmr, LambdaOneKeepsRelevanceOrder) {
  const auto cand = candidates(5);
  std::map<std::string, std::vector<float>> vec;
  for (std::size_t i = 0; i < 5; ++i) vec[cand[i].term] = {1.0f, static_cast<float>(i)};
  const MmrResult r = mmr_rerank(cand, vec, 1.0, 5);
  ASSERT_EQ(r.words.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(r.words[i].term, cand[i].term);
}

TEST(Mmr, LambdaZeroSeparatesDuplicates) {
  const auto cand = candidates(4);
  std::map<std::string, std::vector<float>> vec{
      {"w0", {1, 0, 0}}, {"w1", {1, 0, 0}}, {"w2", {0, 1, 0}}, {"w3", {0, 0, 1}}};
  const MmrResult r = mmr_rerank(cand, vec, 0.0, 4);
  std::vector<std::string> order;
  for (const auto& w : r.words) order.push_back(w.term);
  EXPECT_EQ(order.front(), "w0");
  EXPECT_EQ(order.back(), "w1");
}

TEST(Mmr, MatchesBruteForceGreedy) {
  std::mt19937_64 gen(31);
  std::normal_distribution<float> nd;
  for (int trial = 0; trial < 200; ++trial) {
    const auto cand = candidates(5);
    std::map<std::string, std::vector<float>> vec;
    for (const auto& c : cand) vec[c.term] = {nd(gen), nd(gen), nd(gen)};
    const double lambda = static_cast<double>(gen() % 11) / 10.0;
    const MmrResult r = mmr_rerank(cand, vec, lambda, 4);
    std::vector<std::string> got;
    for (const auto& w : r.words) got.push_back(w.term);
    EXPECT_EQ(got, greedy_oracle(cand, vec, lambda, 4)) << "lambda " << lambda;
  }
}

TEST(Mmr, MissingVectorsKeepInputOrder) {
  spdlog::set_level(spdlog::level::off);
  const auto cand = candidates(3);
  const MmrResult r = mmr_rerank(cand, {{"w0", {1.0f}}}, 0.5, 2);
  EXPECT_FALSE(r.reranked);
  ASSERT_EQ(r.words.size(), 2u);
  EXPECT_EQ(r.words[1].term, "w1");
  spdlog::set_level(spdlog::level::info);
}
