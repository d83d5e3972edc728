#include "fnd/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "fnd/csv.hpp"
#include "fnd/error.hpp"
#include "fnd/random.hpp"

namespace fnd {

namespace fs = std::filesystem;

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_punct(unsigned char c) { return c < 128 && std::ispunct(c) != 0; }

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

template <typename F>
void for_each_word(std::string_view text, F&& f) {
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) f(text.substr(start, i - start));
  }
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Corpus load_csv(const fs::path& path) {
  const auto rows = csv::read_file(path);
  if (rows.empty()) throw DataError(path.string() + ": empty file");
  const auto& header = rows.front();
  std::optional<std::size_t> text_col, label_col, event_col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = lower_ascii(trim(header[i]));
    if (name == "text") text_col = i;
    if (name == "label") label_col = i;
    if (name == "event") event_col = i;
  }
  if (!text_col || !label_col)
    throw DataError(path.string() + ": header must contain text,label columns");

  std::vector<Document> docs;
  docs.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = path.string() + ": row " + std::to_string(r);
    if (row.size() <= std::max(*text_col, *label_col))
      throw DataError(where + ": too few columns");
    const auto label = parse_label(trim(row[*label_col]));
    if (!label)
      throw DataError(where + ": unknown label '" + row[*label_col] + "'");
    if (trim(row[*text_col]).empty()) throw DataError(where + ": empty text");
    Document doc;
    doc.id = "row-" + std::to_string(r);
    doc.text = row[*text_col];
    doc.label = *label;
    if (event_col && *event_col < row.size() && !row[*event_col].empty())
      doc.event = row[*event_col];
    docs.push_back(std::move(doc));
  }
  return Corpus(std::move(docs));
}

std::vector<fs::path> sorted_entries(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  return out;
}

Corpus load_event_dirs(const fs::path& root) {
  std::vector<Document> docs;
  for (const auto& event_dir : sorted_entries(root)) {
    if (!fs::is_directory(event_dir)) continue;
    for (const auto& label_dir : sorted_entries(event_dir)) {
      if (!fs::is_directory(label_dir)) continue;
      const std::string label_text = label_dir.filename().string();
      const auto label = parse_label(label_text);
      if (!label)
        throw DataError(label_dir.string() + ": label directory must be real or fake");
      for (const auto& file : sorted_entries(label_dir)) {
        if (!fs::is_regular_file(file) || file.extension() != ".txt") continue;
        Document doc;
        doc.id = fs::relative(file, root).generic_string();
        doc.text = read_text_file(file);
        if (trim(doc.text).empty()) throw DataError(file.string() + ": empty text");
        doc.label = *label;
        doc.event = event_dir.filename().string();
        docs.push_back(std::move(doc));
      }
    }
  }
  return Corpus(std::move(docs));
}

}  // namespace

std::string_view label_name(Label label) {
  return label == Label::Fake ? "fake" : "real";
}

std::optional<Label> parse_label(std::string_view value) {
  const std::string v = lower_ascii(value);
  if (v == "fake" || v == "1") return Label::Fake;
  if (v == "real" || v == "0") return Label::Real;
  return std::nullopt;
}

Corpus::Corpus(std::vector<Document> documents) : documents_(std::move(documents)) {
  std::unordered_set<std::string> ids;
  for (const auto& doc : documents_) {
    if (trim(doc.text).empty()) throw DataError("document " + doc.id + ": empty text");
    if (!ids.insert(doc.id).second) throw DataError("duplicate document id " + doc.id);
    ++class_counts_[doc.label];
  }
}

std::optional<CorpusFormat> parse_corpus_format(std::string_view name) {
  const std::string n = lower_ascii(name);
  if (n == "csv") return CorpusFormat::Csv;
  if (n == "dirs" || n == "event-dirs" || n == "eventdirs") return CorpusFormat::EventDirs;
  return std::nullopt;
}

Corpus load_corpus(const fs::path& path, CorpusFormat format) {
  if (!fs::exists(path)) throw DataError(path.string() + ": no such file or directory");
  Corpus corpus = format == CorpusFormat::Csv ? load_csv(path) : load_event_dirs(path);
  if (corpus.empty()) throw DataError(path.string() + ": corpus is empty");
  return corpus;
}

void save_corpus_csv(const Corpus& corpus, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  csv::write_row(out, {"text", "label", "event"});
  for (const auto& doc : corpus.documents())
    csv::write_row(out, {doc.text, std::string(label_name(doc.label)),
                         doc.event.value_or("")});
}

void SplitSpec::validate() const {
  auto in_open_unit = [](double x) { return x > 0.0 && x < 1.0; };
  if (!in_open_unit(train_fraction)) throw ConfigError("train_fraction must be in (0,1)");
  if (!in_open_unit(val_fraction)) throw ConfigError("val_fraction must be in (0,1)");
  if (test_fraction < 0.0 || test_fraction >= 1.0)
    throw ConfigError("test_fraction must be in [0,1)");
  if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9)
    throw ConfigError("split fractions must sum to 1");
}

CorpusSplit split(const Corpus& corpus, const SplitSpec& spec) {
  spec.validate();
  if (corpus.empty()) throw DataError("cannot split an empty corpus");

  enum Part : int { kTrain, kVal, kTest };
  std::vector<int> part(corpus.size(), kTrain);
  Rng rng(spec.seed);
  for (Label label : {Label::Fake, Label::Real}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < corpus.size(); ++i)
      if (corpus[i].label == label) members.push_back(i);
    rng.shuffle(members);
    const auto n = static_cast<double>(members.size());
    const auto n_val = static_cast<std::size_t>(std::floor(spec.val_fraction * n));
    const auto n_test = static_cast<std::size_t>(std::floor(spec.test_fraction * n));
    for (std::size_t k = 0; k < n_val; ++k) part[members[k]] = kVal;
    for (std::size_t k = n_val; k < n_val + n_test; ++k) part[members[k]] = kTest;
  }

  std::vector<Document> out[3];
  for (std::size_t i = 0; i < corpus.size(); ++i) out[part[i]].push_back(corpus[i]);
  if (out[kTrain].empty()) throw DataError("split leaves the training set empty");
  return {Corpus(std::move(out[kTrain])), Corpus(std::move(out[kVal])),
          Corpus(std::move(out[kTest]))};
}

std::size_t word_count(std::string_view text) {
  std::size_t n = 0;
  for_each_word(text, [&](std::string_view) { ++n; });
  return n;
}

Histogram word_count_histogram(const Corpus& corpus, std::size_t bin_width) {
  if (bin_width == 0) throw ConfigError("bin_width must be >= 1");
  if (corpus.empty()) throw DataError("histogram of an empty corpus");
  std::vector<std::size_t> counts;
  counts.reserve(corpus.size());
  for (const auto& doc : corpus.documents()) counts.push_back(word_count(doc.text));
  const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  const std::size_t first = *lo / bin_width;
  const std::size_t last = *hi / bin_width;

  Histogram h;
  for (std::size_t k = first; k <= last + 1; ++k) h.bin_edges.push_back(k * bin_width);
  h.bin_counts.assign(last - first + 1, 0);
  for (std::size_t c : counts) ++h.bin_counts[c / bin_width - first];
  return h;
}

double median_word_count(const Corpus& corpus) {
  if (corpus.empty()) return 0.0;
  std::vector<std::size_t> counts;
  for (const auto& doc : corpus.documents()) counts.push_back(word_count(doc.text));
  std::sort(counts.begin(), counts.end());
  const std::size_t n = counts.size();
  if (n % 2 == 1) return static_cast<double>(counts[n / 2]);
  return 0.5 * static_cast<double>(counts[n / 2 - 1] + counts[n / 2]);
}

std::string normalize_term(std::string_view token) {
  while (!token.empty() && is_punct(token.front())) token.remove_prefix(1);
  while (!token.empty() && is_punct(token.back())) token.remove_suffix(1);
  return lower_ascii(token);
}

FreqTable term_frequencies(const Corpus& corpus, FreqScope scope,
                           const std::set<std::string>& stopwords,
                           std::size_t top_k) {
  if (top_k == 0) throw ConfigError("top_k must be >= 1");
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& doc : corpus.documents()) {
    if (scope == FreqScope::FakeOnly && doc.label != Label::Fake) continue;
    if (scope == FreqScope::RealOnly && doc.label != Label::Real) continue;
    for_each_word(doc.text, [&](std::string_view raw) {
      std::string term = normalize_term(raw);
      if (term.empty() || stopwords.contains(term)) return;
      ++counts[std::move(term)];
    });
  }
  FreqTable table;
  table.scope = scope;
  table.entries.assign(counts.begin(), counts.end());
  std::sort(table.entries.begin(), table.entries.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (table.entries.size() > top_k) table.entries.resize(top_k);
  return table;
}

const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> words = {
      "a",    "about", "after", "all",   "also",  "an",    "and",  "are",
      "as",   "at",    "be",    "been",  "but",   "by",    "can",  "for",
      "from", "had",   "has",   "have",  "he",    "her",   "his",  "i",
      "if",   "in",    "into",  "is",    "it",    "its",   "more", "not",
      "of",   "on",    "or",    "our",   "said",  "she",   "so",   "than",
      "that", "the",   "their", "there", "they",  "this",  "to",   "was",
      "we",   "were",  "which", "who",   "will",  "with",  "would", "you"};
  return words;
}

std::set<std::string> load_stopwords(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read stopword file " + path.string());
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    words.insert(lower_ascii(t));
  }
  return words;
}

ClassCounts class_balance(const Corpus& corpus) { return corpus.class_counts(); }

}  // namespace fnd
