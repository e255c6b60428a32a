#pragma once

#include <cstdint>
#include <vector>

namespace topicforge::unicode::detail {

struct CodepointRange {
  char32_t first;
  char32_t last;
};

struct CaseMapping {
  char32_t from;
  char32_t to;
};

extern const std::vector<CodepointRange> kPunctuationRanges;
extern const std::vector<CaseMapping> kLowercaseMappings;

}  // namespace topicforge::unicode::detail
