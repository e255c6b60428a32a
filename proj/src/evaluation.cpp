#include "topicforge/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "topicforge/dynamic.hpp"
#include "topicforge/errors.hpp"

namespace topicforge {

WordLists word_lists(const TopicWords& topics) {
  WordLists out;
  out.reserve(topics.size());
  for (const auto& t : topics) {
    std::vector<std::string> words;
    words.reserve(t.size());
    for (const auto& tw : t) words.push_back(tw.term);
    out.push_back(std::move(words));
  }
  return out;
}

double npmi(double p_a, double p_b, double p_ab) {
  if (p_a <= 0.0 || p_b <= 0.0) return -1.0;
  const double joint = p_ab + kNpmiEpsilon;
  if (joint >= 1.0) return 1.0;
  const double value = std::log(joint / (p_a * p_b)) / -std::log(joint);
  return std::clamp(value, -1.0, 1.0);
}

CooccurrenceCounts::CooccurrenceCounts(const Corpus& reference, const std::vector<std::string>& words,
                                       std::size_t window) {
  if (window < 1) throw ValidationError("co-occurrence window must be at least 1");
  std::unordered_map<std::string, std::size_t> ids;
  for (const auto& w : words) {
    if (ids.emplace(w, words_.size()).second) words_.push_back(w);
  }
  const std::size_t m = words_.size();
  single_.assign(m, 0);
  pair_.assign(m * m, 0);

  std::vector<std::size_t> in_window(m, 0);
  std::vector<std::size_t> present;
  auto count_window = [&] {
    ++windows_;
    for (std::size_t x = 0; x < present.size(); ++x) {
      ++single_[present[x]];
      for (std::size_t y = x + 1; y < present.size(); ++y) {
        const std::size_t a = std::min(present[x], present[y]);
        const std::size_t b = std::max(present[x], present[y]);
        ++pair_[a * m + b];
      }
    }
  };
  auto add = [&](std::size_t id) {
    if (in_window[id]++ == 0) present.push_back(id);
  };
  auto remove = [&](std::size_t id) {
    if (--in_window[id] == 0) present.erase(std::find(present.begin(), present.end(), id));
  };

  std::vector<std::ptrdiff_t> doc_ids;
  for (const auto& doc : reference.documents()) {
    const std::size_t len = doc.tokens.size();
    if (len == 0) continue;
    doc_ids.clear();
    for (const auto& tok : doc.tokens) {
      auto it = ids.find(tok);
      doc_ids.push_back(it == ids.end() ? -1 : static_cast<std::ptrdiff_t>(it->second));
    }
    const std::size_t span = std::min(window, len);
    for (std::size_t i = 0; i < span; ++i) {
      if (doc_ids[i] >= 0) add(static_cast<std::size_t>(doc_ids[i]));
    }
    count_window();
    for (std::size_t start = 1; start + span <= len; ++start) {
      if (doc_ids[start - 1] >= 0) remove(static_cast<std::size_t>(doc_ids[start - 1]));
      if (doc_ids[start + span - 1] >= 0) add(static_cast<std::size_t>(doc_ids[start + span - 1]));
      count_window();
    }
    for (std::size_t i = len - span; i < len; ++i) {
      if (doc_ids[i] >= 0) remove(static_cast<std::size_t>(doc_ids[i]));
    }
  }
}

std::size_t CooccurrenceCounts::id_of(const std::string& w) const {
  auto it = std::find(words_.begin(), words_.end(), w);
  if (it == words_.end()) throw ValidationError("word '" + w + "' was not registered for counting");
  return static_cast<std::size_t>(it - words_.begin());
}

bool CooccurrenceCounts::known(const std::string& w) const { return probability(w) > 0.0; }

double CooccurrenceCounts::probability(const std::string& w) const {
  if (windows_ == 0) return 0.0;
  return static_cast<double>(single_[id_of(w)]) / static_cast<double>(windows_);
}

double CooccurrenceCounts::joint_probability(const std::string& a, const std::string& b) const {
  if (windows_ == 0) return 0.0;
  const std::size_t ia = id_of(a);
  const std::size_t ib = id_of(b);
  if (ia == ib) return probability(a);
  const std::size_t m = words_.size();
  return static_cast<double>(pair_[std::min(ia, ib) * m + std::max(ia, ib)]) / static_cast<double>(windows_);
}

CoherenceResult npmi_coherence(const WordLists& topics, const Corpus& reference, std::size_t top_n, std::size_t window) {
  if (topics.empty()) throw ValidationError("coherence needs at least one topic");
  if (top_n < 2) throw ValidationError("coherence needs top_n of at least 2");
  std::vector<std::string> words;
  for (const auto& t : topics) {
    for (std::size_t i = 0; i < std::min(top_n, t.size()); ++i) words.push_back(t[i]);
  }
  const CooccurrenceCounts counts(reference, words, window);

  CoherenceResult result;
  std::unordered_set<std::string> oov;
  double total = 0.0;
  std::size_t scored = 0;
  for (const auto& t : topics) {
    const std::size_t n = std::min(top_n, t.size());
    if (n < 2) {
      result.per_topic.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!counts.known(t[i])) oov.insert(t[i]);
      for (std::size_t j = i + 1; j < n; ++j) {
        sum += npmi(counts.probability(t[i]), counts.probability(t[j]), counts.joint_probability(t[i], t[j]));
        ++pairs;
      }
    }
    const double topic_score = sum / static_cast<double>(pairs);
    result.per_topic.push_back(topic_score);
    total += topic_score;
    ++scored;
  }
  if (scored == 0) throw ValidationError("no topic has at least two words to score");
  result.oov_words = oov.size();
  if (!oov.empty()) spdlog::warn("{} topic word(s) do not occur in the reference corpus and score -1", oov.size());
  result.score = total / static_cast<double>(scored);
  return result;
}

double topic_diversity(const WordLists& topics, std::size_t top_n) {
  if (topics.empty()) throw ValidationError("diversity needs at least one topic");
  std::unordered_set<std::string> unique;
  std::size_t total = 0;
  for (const auto& t : topics) {
    const std::size_t n = std::min(top_n, t.size());
    total += n;
    unique.insert(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(n));
  }
  if (total == 0) throw ValidationError("diversity needs at least one topic word");
  return static_cast<double>(unique.size()) / static_cast<double>(total);
}

void EvalReport::aggregate() {
  per_topic_count.clear();
  overall = EvalAggregate{};
  overall.config = "overall";
  failed_cells = 0;
  std::map<std::pair<std::string, std::size_t>, std::size_t> slot;
  for (const auto& c : cells) {
    if (!c.ok) {
      ++failed_cells;
      continue;
    }
    auto key = std::make_pair(c.config, c.topic_count);
    auto it = slot.find(key);
    if (it == slot.end()) {
      it = slot.emplace(key, per_topic_count.size()).first;
      per_topic_count.push_back({c.config, c.topic_count, 0, 0.0, 0.0, 0.0});
    }
    auto& agg = per_topic_count[it->second];
    ++agg.cells;
    agg.tc += c.tc;
    agg.td += c.td;
    agg.wall_seconds += c.wall_seconds;
    ++overall.cells;
    overall.tc += c.tc;
    overall.td += c.td;
    overall.wall_seconds += c.wall_seconds;
  }
  auto finish = [](EvalAggregate& a) {
    if (a.cells == 0) return;
    const auto n = static_cast<double>(a.cells);
    a.tc /= n;
    a.td /= n;
    a.wall_seconds /= n;
  };
  for (auto& a : per_topic_count) finish(a);
  finish(overall);
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void check_seeds(std::size_t runs, const std::vector<std::uint64_t>& seeds) {
  if (runs < 1) throw ValidationError("benchmark needs at least one run");
  if (seeds.size() != runs)
    throw ValidationError("benchmark needs one seed per run (" + std::to_string(runs) + " runs, " +
                          std::to_string(seeds.size()) + " seeds)");
}

// Fits and reduces to exactly topic_count topics.
PipelineResult fit_at(const Corpus& raw, PipelineConfig cfg, std::uint64_t seed, std::size_t topic_count) {
  cfg.seed = seed;
  cfg.nr_topics.reset();
  PipelineResult result = fit_pipeline(cfg, raw);
  const std::size_t k = result.model.num_topics();
  if (k < topic_count)
    throw PipelineError("fitted " + std::to_string(k) + " topics, fewer than the requested " +
                        std::to_string(topic_count));
  if (k > topic_count) result.model = reduce_topics(result.model, result.corpus, topic_count);
  return result;
}

}  // namespace

EvalReport run_benchmark(const Corpus& raw, const PipelineConfig& base, const BenchmarkOptions& options) {
  check_seeds(options.runs, options.seeds);
  if (options.topic_counts.empty()) throw ValidationError("benchmark needs at least one topic count");
  EvalReport report;
  for (std::size_t topic_count : options.topic_counts) {
    for (std::size_t run = 0; run < options.runs; ++run) {
      EvalCell cell;
      cell.config = options.config_name;
      cell.topic_count = topic_count;
      cell.run = run;
      cell.seed = options.seeds[run];
      const auto start = std::chrono::steady_clock::now();
      try {
        PipelineResult result = fit_at(raw, base, cell.seed, topic_count);
        cell.wall_seconds = seconds_since(start);
        cell.fitted_topics = result.model.num_topics();
        const auto& vocab = result.model.vocab;
        const WordLists tc_words = word_lists(top_n_words(result.model.twm, vocab, options.coherence_top_n));
        const WordLists td_words = word_lists(top_n_words(result.model.twm, vocab, options.diversity_top_n));
        cell.tc = npmi_coherence(tc_words, result.corpus, options.coherence_top_n, options.window).score;
        cell.td = topic_diversity(td_words, options.diversity_top_n);
      } catch (const Error& e) {
        cell.ok = false;
        cell.error = e.what();
        cell.wall_seconds = seconds_since(start);
        spdlog::warn("benchmark cell topics={} run={} failed: {}", topic_count, run, e.what());
      }
      report.cells.push_back(std::move(cell));
    }
  }
  report.aggregate();
  return report;
}

EvalReport run_dynamic_benchmark(const Corpus& raw, const PipelineConfig& base, const DynamicBenchmarkOptions& options) {
  check_seeds(options.runs, options.seeds);
  EvalReport report;
  const std::string name = options.config_name + (options.evolve ? "-evolve" : "");
  for (std::size_t run = 0; run < options.runs; ++run) {
    const auto start = std::chrono::steady_clock::now();
    auto failed = [&](const std::string& why, std::optional<std::size_t> timestep) {
      EvalCell cell;
      cell.config = name;
      cell.topic_count = options.topic_count;
      cell.run = run;
      cell.seed = options.seeds[run];
      cell.timestep = timestep;
      cell.ok = false;
      cell.error = why;
      cell.wall_seconds = seconds_since(start);
      report.cells.push_back(std::move(cell));
    };
    try {
      PipelineResult result = fit_at(raw, base, options.seeds[run], options.topic_count);
      auto reps = topics_over_time(result.model, result.corpus, bin_timestamps(result.corpus, options.bins));
      if (options.evolve) reps = smooth_representations(reps);
      const double wall = seconds_since(start);
      for (const auto& rep : reps) {
        EvalCell cell;
        cell.config = name;
        cell.topic_count = options.topic_count;
        cell.run = run;
        cell.seed = options.seeds[run];
        cell.timestep = rep.timestep;
        cell.wall_seconds = wall;
        cell.fitted_topics = result.model.num_topics();
        try {
          WordLists tc_words, td_words;
          for (auto& w : word_lists(top_n_words(rep.matrix, result.model.vocab, options.coherence_top_n)))
            if (!w.empty()) tc_words.push_back(std::move(w));
          for (auto& w : word_lists(top_n_words(rep.matrix, result.model.vocab, options.diversity_top_n)))
            if (!w.empty()) td_words.push_back(std::move(w));
          if (tc_words.empty()) throw PipelineError("no topic is present at this timestep");
          cell.tc = npmi_coherence(tc_words, result.corpus, options.coherence_top_n, options.window).score;
          cell.td = topic_diversity(td_words, options.diversity_top_n);
        } catch (const Error& e) {
          cell.ok = false;
          cell.error = e.what();
        }
        report.cells.push_back(std::move(cell));
      }
    } catch (const Error& e) {
      spdlog::warn("dynamic benchmark run {} failed: {}", run, e.what());
      failed(e.what(), std::nullopt);
    }
  }
  report.aggregate();
  return report;
}

std::string report_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "config,topic_count,run,tc,td,wall_seconds\n";
  out << std::setprecision(6) << std::fixed;
  for (const auto& c : report.cells) {
    out << c.config;
    if (c.timestep) out << "/t" << *c.timestep;
    out << ',' << c.topic_count << ',' << c.run << ',';
    if (c.ok) {
      out << c.tc << ',' << c.td;
    } else {
      out << "nan,nan";
    }
    out << ',' << c.wall_seconds << '\n';
  }
  return out.str();
}

std::string report_table(const EvalReport& report) {
  std::ostringstream out;
  out << std::left << std::setw(28) << "config" << std::right << std::setw(8) << "topics" << std::setw(7) << "cells"
      << std::setw(10) << "TC" << std::setw(10) << "TD" << std::setw(12) << "wall (s)" << '\n';
  out << std::string(75, '-') << '\n';
  out << std::fixed;
  auto line = [&](const EvalAggregate& a, const std::string& topics) {
    out << std::left << std::setw(28) << a.config << std::right << std::setw(8) << topics << std::setw(7) << a.cells
        << std::setprecision(3) << std::setw(10) << a.tc << std::setw(10) << a.td << std::setprecision(2)
        << std::setw(12) << a.wall_seconds << '\n';
  };
  for (const auto& a : report.per_topic_count) line(a, std::to_string(a.topic_count));
  out << std::string(75, '-') << '\n';
  line(report.overall, "all");
  if (report.failed_cells > 0) out << report.failed_cells << " cell(s) failed and are excluded from the means\n";
  return out.str();
}

}  // namespace topicforge
