#include "topicforge/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "topicforge/errors.hpp"
#include "topicforge/text.hpp"

namespace topicforge {

namespace {

using nlohmann::json;

// Small English list in the spirit of common NLP defaults.
constexpr const char* kDefaultStopwords[] = {
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for",
    "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself",
    "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just",
    "me", "more", "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once",
    "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own", "same", "she",
    "should", "so", "some", "such", "than", "that", "the", "their", "theirs", "them",
    "themselves", "then", "there", "these", "they", "this", "those", "through", "to", "too",
    "under", "until", "up", "very", "was", "we", "were", "what", "when", "where", "which",
    "while", "who", "whom", "why", "will", "with", "would", "you", "your", "yours", "yourself",
    "yourselves", "s", "t", "don", "also", "may", "might", "must", "shall", "us", "one",
    "get", "got", "like", "much", "many", "well", "even", "still", "yet", "ll", "re", "ve", "d",
    "m"};

std::string normalize(const std::string& raw, bool lowercase, bool strip_punctuation) {
  if (!lowercase && !strip_punctuation) return raw;
  std::u32string cps = text::decode_utf8(raw);
  for (char32_t& cp : cps) {
    if (strip_punctuation && text::is_punctuation(cp)) {
      cp = U' ';
    } else if (lowercase) {
      cp = text::to_lower(cp);
    }
  }
  return text::encode_utf8(cps);
}

class Tokenizer {
 public:
  explicit Tokenizer(const PreprocessOptions& opts) : opts_(opts) {
    if (opts_.remove_stopwords) {
      for (const auto& w : opts_.stopwords) {
        for (auto& piece : text::split_whitespace(normalize(w, opts_.lowercase, opts_.strip_punctuation)))
          stopwords_.insert(std::move(piece));
      }
    }
  }

  std::vector<std::string> operator()(const std::string& raw) const {
    auto tokens = text::split_whitespace(normalize(raw, opts_.lowercase, opts_.strip_punctuation));
    if (opts_.remove_stopwords) {
      std::erase_if(tokens, [&](const std::string& t) { return stopwords_.contains(t); });
    }
    return tokens;
  }

 private:
  const PreprocessOptions& opts_;
  std::unordered_set<std::string> stopwords_;
};

}  // namespace

Corpus::Corpus(std::vector<Document> documents) : documents_(std::move(documents)) {
  std::unordered_set<std::string> seen;
  for (const auto& d : documents_) {
    if (!seen.insert(d.id).second) throw ValidationError("duplicate document id '" + d.id + "'");
  }
}

std::unordered_set<std::string> PreprocessOptions::default_stopwords() {
  return {std::begin(kDefaultStopwords), std::end(kDefaultStopwords)};
}

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> document_frequency)
    : terms_(std::move(terms)), document_frequency_(std::move(document_frequency)) {
  if (terms_.size() != document_frequency_.size())
    throw ValidationError("vocabulary terms and document frequencies differ in length");
  term_to_index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (i > 0 && !(terms_[i - 1] < terms_[i]))
      throw ValidationError("vocabulary terms must be unique and sorted");
    term_to_index_.emplace(terms_[i], i);
  }
}

std::optional<std::size_t> Vocabulary::index_of(const std::string& term) const {
  auto it = term_to_index_.find(term);
  if (it == term_to_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<std::size_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    auto it = term_to_index_.find(t);
    if (it != term_to_index_.end()) ids.push_back(it->second);
  }
  return ids;
}

std::vector<std::size_t> TimeBinning::bin_counts() const {
  std::vector<std::size_t> counts(num_bins, 0);
  for (std::size_t b : doc_to_bin) ++counts[b];
  return counts;
}

Corpus load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file " + path.string());
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line_no, "expected a JSON object");
    if (!obj.contains("id") || !obj["id"].is_string()) throw ParseError(line_no, "missing string field \"id\"");
    if (!obj.contains("text") || !obj["text"].is_string())
      throw ParseError(line_no, "missing string field \"text\"");
    Document doc;
    doc.id = obj["id"].get<std::string>();
    doc.raw_text = obj["text"].get<std::string>();
    if (obj.contains("timestamp") && !obj["timestamp"].is_null()) {
      if (!obj["timestamp"].is_number_integer())
        throw ParseError(line_no, "field \"timestamp\" must be an integer");
      doc.timestamp = obj["timestamp"].get<std::int64_t>();
    }
    for (const auto& [key, value] : obj.items()) {
      if (key == "id" || key == "text" || key == "timestamp") continue;
      doc.metadata[key] = value.is_string() ? value.get<std::string>() : value.dump();
    }
    if (!seen.insert(doc.id).second)
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate document id '" + doc.id + "'");
    docs.push_back(std::move(doc));
  }
  if (in.bad()) throw IoError("read failure on " + path.string());
  return Corpus(std::move(docs));
}

void write_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& d : corpus.documents()) {
    json obj = {{"id", d.id}, {"text", d.raw_text}};
    if (d.timestamp) obj["timestamp"] = *d.timestamp;
    for (const auto& [k, v] : d.metadata) obj[k] = v;
    out << obj.dump() << '\n';
  }
  if (!out) throw IoError("write failure on " + path.string());
}

std::unordered_set<std::string> load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open stopword file " + path.string());
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    for (auto& w : text::split_whitespace(line)) words.insert(std::move(w));
  }
  return words;
}

std::vector<std::string> tokenize(const std::string& raw_text, const PreprocessOptions& opts) {
  return Tokenizer(opts)(raw_text);
}

Corpus preprocess(const Corpus& corpus, const PreprocessOptions& opts) {
  if (opts.min_df < 1) throw ValidationError("min_df must be at least 1");
  const Tokenizer tokenizer(opts);
  std::vector<Document> kept;
  kept.reserve(corpus.size());
  for (const auto& doc : corpus.documents()) {
    Document d = doc;
    d.tokens = tokenizer(d.raw_text);
    if (d.tokens.size() >= opts.min_doc_tokens) kept.push_back(std::move(d));
  }
  return Corpus(std::move(kept));
}

Vocabulary build_vocabulary(const Corpus& corpus, std::size_t min_df) {
  if (min_df < 1) throw ValidationError("min_df must be at least 1");
  std::unordered_map<std::string, std::size_t> df;
  std::unordered_set<std::string_view> in_doc;
  for (const auto& doc : corpus.documents()) {
    in_doc.clear();
    for (const auto& t : doc.tokens) {
      if (in_doc.insert(t).second) ++df[t];
    }
  }
  std::vector<std::string> terms;
  for (const auto& [term, count] : df) {
    if (count >= min_df) terms.push_back(term);
  }
  std::sort(terms.begin(), terms.end());
  std::vector<std::size_t> freq;
  freq.reserve(terms.size());
  for (const auto& t : terms) freq.push_back(df.at(t));
  return Vocabulary(std::move(terms), std::move(freq));
}

TimeBinning bin_timestamps(const Corpus& corpus, std::size_t num_bins) {
  if (num_bins < 1) throw ValidationError("num_bins must be at least 1");
  std::vector<std::string> missing;
  for (const auto& d : corpus.documents()) {
    if (!d.timestamp) missing.push_back(d.id);
  }
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << missing.size() << " document(s) lack a timestamp:";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg << ' ' << missing[i];
    if (missing.size() > 20) msg << " ...";
    throw ValidationError(msg.str());
  }

  TimeBinning binning;
  binning.num_bins = num_bins;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  if (!corpus.empty()) {
    lo = hi = *corpus[0].timestamp;
    for (const auto& d : corpus.documents()) {
      lo = std::min(lo, *d.timestamp);
      hi = std::max(hi, *d.timestamp);
    }
  }
  const auto range = static_cast<__int128>(hi) - lo;
  for (std::size_t i = 0; i <= num_bins; ++i) {
    binning.bin_edges.push_back(static_cast<double>(lo) +
                                static_cast<double>(range) * static_cast<double>(i) / static_cast<double>(num_bins));
  }
  for (std::size_t i = 0; i < num_bins; ++i) {
    std::ostringstream label;
    label << std::fixed << std::setprecision(0) << binning.bin_edges[i] << ".." << binning.bin_edges[i + 1];
    binning.bin_labels.push_back(label.str());
  }
  binning.doc_to_bin.reserve(corpus.size());
  for (const auto& d : corpus.documents()) {
    std::size_t bin = 0;
    if (range > 0) {
      // Exact integer form of floor((ts - lo) / width).
      const __int128 scaled = (static_cast<__int128>(*d.timestamp) - lo) * static_cast<__int128>(num_bins) / range;
      bin = std::min<std::size_t>(static_cast<std::size_t>(scaled), num_bins - 1);
    }
    binning.doc_to_bin.push_back(bin);
  }
  return binning;
}

TimeBinning bin_by_field(const Corpus& corpus, const std::string& field) {
  std::vector<std::string> missing;
  std::set<std::string> values;
  for (const auto& d : corpus.documents()) {
    auto it = d.metadata.find(field);
    if (it == d.metadata.end()) {
      missing.push_back(d.id);
    } else {
      values.insert(it->second);
    }
  }
  if (!missing.empty())
    throw ValidationError(std::to_string(missing.size()) + " document(s) lack field \"" + field +
                          "\", first: " + missing.front());
  TimeBinning binning;
  binning.bin_labels.assign(values.begin(), values.end());
  binning.num_bins = binning.bin_labels.size();
  for (const auto& d : corpus.documents()) {
    const auto& v = d.metadata.at(field);
    auto pos = std::lower_bound(binning.bin_labels.begin(), binning.bin_labels.end(), v);
    binning.doc_to_bin.push_back(static_cast<std::size_t>(pos - binning.bin_labels.begin()));
  }
  return binning;
}

}  // namespace topicforge
