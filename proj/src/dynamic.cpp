#include "topicforge/dynamic.hpp"

#include <cmath>

#include "topicforge/errors.hpp"
#include "topicforge/parallel.hpp"

namespace topicforge {

namespace {

SparseMatrix l1_normalize_rows(const SparseMatrix& m) {
  SparseMatrix out = m;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto val = out.row_values(r);
    double norm = 0.0;
    for (double v : val) norm += std::abs(v);
    if (norm == 0.0) continue;
    for (double& v : val) v /= norm;
  }
  return out;
}

bool row_is_zero(const SparseMatrix& m, std::size_t r) {
  for (double v : m.row_values(r)) {
    if (v != 0.0) return false;
  }
  return true;
}

}  // namespace

std::vector<TimestepRepresentation> topics_over_time(const TopicModel& model, const Corpus& corpus,
                                                     const TimeBinning& binning) {
  if (binning.doc_to_bin.size() != corpus.size())
    throw ValidationError("binning covers " + std::to_string(binning.doc_to_bin.size()) + " documents but the corpus has " +
                          std::to_string(corpus.size()));
  if (model.assignment.size() != corpus.size())
    throw ValidationError("model was fitted on " + std::to_string(model.assignment.size()) +
                          " documents but the corpus has " + std::to_string(corpus.size()));
  for (std::size_t b : binning.doc_to_bin) {
    if (b >= binning.num_bins) throw ValidationError("bin index out of range");
  }

  const std::vector<double> icf = inverse_class_frequency(model.ctm, model.options);
  const std::size_t vocab_size = model.vocab.size();
  std::vector<std::vector<Triplet>> per_bin(binning.num_bins);
  std::vector<std::size_t> doc_counts(binning.num_bins, 0);
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const std::size_t bin = binning.doc_to_bin[d];
    ++doc_counts[bin];
    const int label = model.assignment.labels[d];
    if (label == kOutlierLabel) continue;
    for (std::size_t t : model.vocab.encode(corpus[d].tokens))
      per_bin[bin].push_back({static_cast<std::uint32_t>(label), static_cast<std::uint32_t>(t), 1.0});
  }

  std::vector<TimestepRepresentation> reps(binning.num_bins);
  parallel_for(binning.num_bins, [&](std::size_t i) {
    reps[i].timestep = i;
    reps[i].doc_count = doc_counts[i];
    SparseMatrix w = SparseMatrix::from_triplets(model.num_topics(), vocab_size, std::move(per_bin[i]));
    for (std::size_t c = 0; c < w.rows(); ++c) {
      auto idx = w.row_indices(c);
      auto val = w.row_values(c);
      for (std::size_t k = 0; k < idx.size(); ++k) val[k] = val[k] * icf[idx[k]];
    }
    reps[i].matrix.weights = std::move(w);
  }, 1);
  return reps;
}

std::vector<TimestepRepresentation> smooth_representations(const std::vector<TimestepRepresentation>& reps) {
  std::vector<SparseMatrix> normalized;
  normalized.reserve(reps.size());
  for (const auto& r : reps) normalized.push_back(l1_normalize_rows(r.matrix.weights));

  std::vector<TimestepRepresentation> out;
  out.reserve(reps.size());
  for (std::size_t i = 0; i < reps.size(); ++i) {
    TimestepRepresentation r;
    r.timestep = reps[i].timestep;
    r.doc_count = reps[i].doc_count;
    r.normalized = true;
    const SparseMatrix& cur = normalized[i];
    if (i == 0) {
      r.matrix.weights = cur;
      out.push_back(std::move(r));
      continue;
    }
    const SparseMatrix& prev = normalized[i - 1];
    if (prev.rows() != cur.rows() || prev.cols() != cur.cols())
      throw ValidationError("timestep representations differ in shape");
    std::vector<Triplet> entries;
    for (std::size_t c = 0; c < cur.rows(); ++c) {
      const bool cur_zero = row_is_zero(cur, c);
      const bool prev_zero = row_is_zero(prev, c);
      auto emit = [&](const SparseMatrix& m, double scale) {
        auto idx = m.row_indices(c);
        auto val = m.row_values(c);
        for (std::size_t k = 0; k < idx.size(); ++k)
          entries.push_back({static_cast<std::uint32_t>(c), idx[k], val[k] * scale});
      };
      if (cur_zero) {
        continue;
      } else if (prev_zero) {
        emit(cur, 1.0);
      } else {
        emit(cur, 0.5);
        emit(prev, 0.5);
      }
    }
    r.matrix.weights = SparseMatrix::from_triplets(cur.rows(), cur.cols(), std::move(entries));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace topicforge
