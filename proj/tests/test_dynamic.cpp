#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"
#include "topicforge/dynamic.hpp"

using namespace topicforge;

namespace {

ClusterAssignment labels(std::vector<int> l) {
  std::vector<double> p(l.size(), 1.0);
  return ClusterAssignment::from_labels(std::move(l), std::move(p));
}

TimestepRepresentation rep(std::size_t t, std::vector<std::vector<double>> rows) {
  std::vector<Triplet> trip;
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      if (rows[r][c] != 0.0) trip.push_back({static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c), rows[r][c]});
  TimestepRepresentation out;
  out.timestep = t;
  out.matrix.weights = SparseMatrix::from_triplets(rows.size(), rows[0].size(), trip);
  return out;
}

struct Fixture {
  Corpus corpus;
  TopicModel model;
};

Fixture random_model(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  Corpus raw = tf_test::random_corpus(gen, 80, 40, 20);
  std::vector<Document> docs = raw.documents();
  std::uniform_int_distribution<std::int64_t> ts(0, 100000);
  for (auto& d : docs) d.timestamp = ts(gen);
  Corpus c(docs);
  std::vector<int> l(80);
  for (std::size_t i = 0; i < 80; ++i) l[i] = i < 4 ? static_cast<int>(i) : static_cast<int>(gen() % 5) - 1;
  TopicModel m = build_topic_model(c, labels(l), build_vocabulary(c));
  return {std::move(c), std::move(m)};
}

}  // namespace

TEST(TopicsOverTime, SingleBinIsBitIdentical) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const Fixture f = random_model(seed);
    const auto reps = topics_over_time(f.model, f.corpus, bin_timestamps(f.corpus, 1));
    ASSERT_EQ(reps.size(), 1u);
    EXPECT_EQ(reps[0].matrix.weights, f.model.twm.weights);
  }
}

TEST(TopicsOverTime, HandValueWithGlobalIdf) {
  // Global model from the fruit example (A = 2.5, tf_banana = 2), then a bin
  // in which topic 0 holds three bananas.
  const Corpus fit = tf_test::token_corpus({{"apple", "apple", "banana"}, {"banana", "cherry"}});
  const TopicModel m = build_topic_model(fit, labels({0, 1}), build_vocabulary(fit));
  const Corpus later({tf_test::doc("x", {"banana", "banana", "banana"}, 0), tf_test::doc("y", {"cherry"}, 10)});
  TopicModel at = m;
  at.assignment = labels({0, 1});
  const auto reps = topics_over_time(at, later, bin_timestamps(later, 2));
  const std::size_t banana = *m.vocab.index_of("banana");
  EXPECT_NEAR(reps[0].matrix.weights.at(0, banana), 2.43280, 1e-5);
  EXPECT_NEAR(reps[0].matrix.weights.at(0, banana), 2.432790648649, 1e-12);
  EXPECT_EQ(reps[0].matrix.weights.row_indices(1).size(), 0u);
}

TEST(TopicsOverTime, BinsSumToGlobalCounts) {
  const Fixture f = random_model(4);
  const TimeBinning bins = bin_timestamps(f.corpus, 6);
  const auto reps = topics_over_time(f.model, f.corpus, bins);
  const auto icf = inverse_class_frequency(f.model.ctm);
  for (std::size_t c = 0; c < f.model.num_topics(); ++c) {
    for (std::size_t t = 0; t < f.model.vocab.size(); ++t) {
      double sum = 0.0;
      for (const auto& r : reps) sum += icf[t] > 0 ? r.matrix.weights.at(c, t) / icf[t] : 0.0;
      if (icf[t] > 0) EXPECT_NEAR(sum, f.model.ctm.tf.at(c, t), 1e-9);
    }
  }
  std::size_t docs = 0;
  for (const auto& r : reps) docs += r.doc_count;
  EXPECT_EQ(docs, f.corpus.size());
}

TEST(TopicsOverTime, RepeatableAndEmptyTopicRowsAreZero) {
  const Fixture f = random_model(5);
  const TimeBinning bins = bin_timestamps(f.corpus, 40);
  const auto a = topics_over_time(f.model, f.corpus, bins);
  const auto b = topics_over_time(f.model, f.corpus, bins);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].matrix.weights, b[i].matrix.weights);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t c = 0; c < f.model.num_topics(); ++c) {
      bool present = false;
      for (std::size_t d = 0; d < f.corpus.size(); ++d)
        if (bins.doc_to_bin[d] == i && f.model.assignment.labels[d] == static_cast<int>(c)) present = true;
      if (!present) EXPECT_EQ(a[i].matrix.weights.row_indices(c).size(), 0u);
    }
  }
}

TEST(TopicsOverTime, RejectsMismatchedBinning) {
  const Fixture f = random_model(6);
  TimeBinning b = bin_timestamps(f.corpus, 3);
  b.doc_to_bin.pop_back();
  EXPECT_THROW(topics_over_time(f.model, f.corpus, b), ValidationError);
}

TEST(Smoothing, HandExample) {
  const auto out = smooth_representations({rep(0, {{1, 1}}), rep(1, {{3, 1}})});
  EXPECT_NEAR(out[0].matrix.weights.at(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(out[1].matrix.weights.at(0, 0), 0.625, 1e-12);
  EXPECT_NEAR(out[1].matrix.weights.at(0, 1), 0.375, 1e-12);
  EXPECT_TRUE(out[1].normalized);
}

TEST(Smoothing, FixedPointAndUnitRows) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0, 5);
  std::vector<std::vector<double>> rows(4, std::vector<double>(9));
  for (auto& r : rows)
    for (auto& v : r) v = gen() % 3 == 0 ? 0.0 : u(gen);
  rows[2].assign(9, 0.0);
  std::vector<TimestepRepresentation> same;
  for (std::size_t t = 0; t < 5; ++t) same.push_back(rep(t, rows));
  const auto out = smooth_representations(same);
  const auto first = smooth_representations({same[0]});
  for (const auto& r : out) {
    for (std::size_t c = 0; c < 4; ++c) {
      const auto got = r.matrix.weights.dense_row(c);
      const auto want = first[0].matrix.weights.dense_row(c);
      double l1 = 0.0;
      for (std::size_t j = 0; j < 9; ++j) {
        EXPECT_LT(std::abs(got[j] - want[j]), 1e-12);
        l1 += got[j];
      }
      if (c != 2) EXPECT_NEAR(l1, 1.0, 1e-9);
      else EXPECT_EQ(l1, 0.0);
    }
  }
}

TEST(Smoothing, ZeroPreviousRowKeepsCurrent) {
  const auto out = smooth_representations({rep(0, {{0, 0}}), rep(1, {{1, 3}})});
  EXPECT_NEAR(out[1].matrix.weights.at(0, 0), 0.25, 1e-12);
  EXPECT_NEAR(out[1].matrix.weights.at(0, 1), 0.75, 1e-12);
}
