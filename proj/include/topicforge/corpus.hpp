#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace topicforge {

struct Document {
  std::string id;
  std::string raw_text;
  std::vector<std::string> tokens;
  std::optional<std::int64_t> timestamp;
  // Extra string-valued JSONL fields, available for grouping.
  std::map<std::string, std::string> metadata;
};

// Documents in file order. Ids are unique.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Document> documents);

  std::size_t size() const noexcept { return documents_.size(); }
  bool empty() const noexcept { return documents_.empty(); }
  const std::vector<Document>& documents() const noexcept { return documents_; }
  const Document& operator[](std::size_t i) const { return documents_[i]; }

 private:
  std::vector<Document> documents_;
};

struct PreprocessOptions {
  bool lowercase = true;
  bool strip_punctuation = true;
  bool remove_stopwords = true;
  std::unordered_set<std::string> stopwords = default_stopwords();
  std::size_t min_doc_tokens = 5;
  std::size_t min_df = 1;

  static std::unordered_set<std::string> default_stopwords();
};

class Vocabulary {
 public:
  Vocabulary() = default;
  // terms must be unique and sorted; document_frequency is parallel to terms.
  Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> document_frequency);

  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  const std::vector<std::string>& terms() const noexcept { return terms_; }
  const std::string& term(std::size_t index) const { return terms_[index]; }
  std::size_t document_frequency(std::size_t index) const { return document_frequency_[index]; }
  const std::vector<std::size_t>& document_frequencies() const noexcept { return document_frequency_; }
  std::optional<std::size_t> index_of(const std::string& term) const;

  // Term indices of a token stream; out-of-vocabulary tokens are skipped.
  std::vector<std::size_t> encode(const std::vector<std::string>& tokens) const;

 private:
  std::vector<std::string> terms_;
  std::vector<std::size_t> document_frequency_;
  std::unordered_map<std::string, std::size_t> term_to_index_;
};

// Assignment of documents to bins. Time bins carry their edges; categorical
// groupings carry a label per bin instead.
struct TimeBinning {
  std::size_t num_bins = 0;
  std::vector<double> bin_edges;
  std::vector<std::string> bin_labels;
  std::vector<std::size_t> doc_to_bin;

  std::vector<std::size_t> bin_counts() const;
};

Corpus load_jsonl(const std::filesystem::path& path);
void write_jsonl(const Corpus& corpus, const std::filesystem::path& path);

std::unordered_set<std::string> load_stopwords(const std::filesystem::path& path);

// Normalizes one text into tokens: optional lowercasing and punctuation
// stripping (punctuation becomes a separator), whitespace split, optional
// stopword removal.
std::vector<std::string> tokenize(const std::string& raw_text, const PreprocessOptions& opts);

// Tokenizes every document from its raw text and drops documents shorter than
// opts.min_doc_tokens.
Corpus preprocess(const Corpus& corpus, const PreprocessOptions& opts);

Vocabulary build_vocabulary(const Corpus& corpus, std::size_t min_df = 1);

// Equal-width bins over [min_ts, max_ts]; bins are half-open except the last.
TimeBinning bin_timestamps(const Corpus& corpus, std::size_t num_bins);

// One bin per distinct value of a metadata field, bins ordered by value.
TimeBinning bin_by_field(const Corpus& corpus, const std::string& field);

}  // namespace topicforge
