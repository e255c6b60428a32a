#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "topicforge/corpus.hpp"
#include "topicforge/ctfidf.hpp"

namespace topicforge {

// Topic-word weights restricted to the documents of one bin, weighted with the
// global inverse class frequency of the fitted model.
struct TimestepRepresentation {
  std::size_t timestep = 0;
  TopicWordMatrix matrix;
  bool normalized = false;
  std::size_t doc_count = 0;
};

std::vector<TimestepRepresentation> topics_over_time(const TopicModel& model, const Corpus& corpus,
                                                     const TimeBinning& binning);

// L1-normalizes every topic row, then averages each row with the same topic's
// normalized row at the previous timestep. A zero row on either side is not
// averaged in.
std::vector<TimestepRepresentation> smooth_representations(const std::vector<TimestepRepresentation>& reps);

}  // namespace topicforge
