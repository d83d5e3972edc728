#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace fnd {

// Class index order matters: Real is class 0, Fake (the positive class) is 1.
enum class Label : int { Real = 0, Fake = 1 };

inline constexpr int kNumClasses = 2;

std::string_view label_name(Label label);

/// Case-insensitive `fake`/`real`, or integers 1/0.
std::optional<Label> parse_label(std::string_view value);

struct Document {
  std::string id;
  std::string text;
  Label label = Label::Real;
  std::optional<std::string> event;

  bool operator==(const Document&) const = default;
};

using ClassCounts = std::map<Label, std::size_t>;

class Corpus {
 public:
  Corpus() = default;
  /// Throws DataError on empty text or duplicate ids.
  explicit Corpus(std::vector<Document> documents);

  const std::vector<Document>& documents() const { return documents_; }
  const ClassCounts& class_counts() const { return class_counts_; }
  std::size_t size() const { return documents_.size(); }
  bool empty() const { return documents_.empty(); }
  const Document& operator[](std::size_t i) const { return documents_[i]; }

 private:
  std::vector<Document> documents_;
  ClassCounts class_counts_{{Label::Real, 0}, {Label::Fake, 0}};
};

enum class CorpusFormat { Csv, EventDirs };

std::optional<CorpusFormat> parse_corpus_format(std::string_view name);

/// Csv: header with `text` and `label` columns (optional `event`).
/// EventDirs: `<event>/<real|fake>/<file>.txt`.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);

/// Writes `text,label,event` with RFC-4180 quoting; reloads to the same
/// documents in order (ids become row based).
void save_corpus_csv(const Corpus& corpus, const std::filesystem::path& path);

struct SplitSpec {
  double train_fraction = 0.8;
  double val_fraction = 0.2;
  double test_fraction = 0.0;
  std::uint64_t seed = 42;

  void validate() const;
};

struct CorpusSplit {
  Corpus train;
  Corpus val;
  Corpus test;
};

/// Stratified split. Within each class the documents are shuffled, then val
/// and test take floor(fraction * class size) each and train keeps the rest.
/// Every output preserves the input order of its members.
CorpusSplit split(const Corpus& corpus, const SplitSpec& spec);

struct Histogram {
  std::vector<std::size_t> bin_edges;
  std::vector<std::size_t> bin_counts;
};

/// Number of maximal whitespace-separated tokens.
std::size_t word_count(std::string_view text);

Histogram word_count_histogram(const Corpus& corpus, std::size_t bin_width);

double median_word_count(const Corpus& corpus);

enum class FreqScope { All, FakeOnly, RealOnly };

struct FreqTable {
  FreqScope scope = FreqScope::All;
  std::vector<std::pair<std::string, std::size_t>> entries;
};

/// Lowercased, edge-punctuation-stripped whitespace token; empty when the
/// token was pure punctuation.
std::string normalize_term(std::string_view token);

FreqTable term_frequencies(const Corpus& corpus, FreqScope scope,
                           const std::set<std::string>& stopwords,
                           std::size_t top_k);

const std::set<std::string>& default_stopwords();

/// One lowercased word per line; blank lines and `#` lines ignored.
std::set<std::string> load_stopwords(const std::filesystem::path& path);

ClassCounts class_balance(const Corpus& corpus);

}  // namespace fnd
