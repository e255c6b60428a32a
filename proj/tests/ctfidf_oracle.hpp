#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "topicforge/corpus.hpp"

namespace tf_test {

// Class-based weights evaluated term by term from raw counts:
// W(t,c) = tf(t,c) * ln(1 + A / tf(t)), A = clustered tokens / classes.
inline std::map<std::pair<int, std::string>, double> scalar_ctfidf(const topicforge::Corpus& corpus,
                                                                    const std::vector<int>& labels, int classes) {
  std::map<std::pair<int, std::string>, double> tf;
  std::map<std::string, double> tf_term;
  double tokens = 0.0;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    if (labels[d] < 0) continue;
    for (const auto& w : corpus[d].tokens) {
      tf[{labels[d], w}] += 1.0;
      tf_term[w] += 1.0;
      tokens += 1.0;
    }
  }
  const double a = tokens / classes;
  std::map<std::pair<int, std::string>, double> out;
  for (const auto& [key, count] : tf) out[key] = count * std::log(1.0 + a / tf_term[key.second]);
  return out;
}

}  // namespace tf_test
