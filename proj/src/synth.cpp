#include "fnd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fnd/error.hpp"
#include "fnd/random.hpp"

namespace fnd {

namespace {

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";

struct Inventory {
  std::vector<std::string> fake_keywords;
  std::vector<std::string> real_keywords;
  std::vector<std::vector<std::string>> phrases;
  // topics[t] lists phrase indices in rank order; cdfs[t] is Zipf(1) over them.
  std::vector<std::vector<std::size_t>> topics;
  std::vector<std::vector<double>> cdfs;
};

Inventory make_inventory(const SynthConfig& cfg) {
  const auto words = synth_words(cfg);
  Inventory inv;
  std::size_t i = 0;
  for (; i < cfg.keywords_per_class; ++i) inv.fake_keywords.push_back(words[i]);
  for (; i < 2 * cfg.keywords_per_class; ++i) inv.real_keywords.push_back(words[i]);
  while (i + cfg.phrase_length <= words.size()) {
    inv.phrases.emplace_back(words.begin() + static_cast<std::ptrdiff_t>(i),
                             words.begin() + static_cast<std::ptrdiff_t>(i + cfg.phrase_length));
    i += cfg.phrase_length;
  }
  const std::size_t n_topics = std::min(cfg.num_topics, inv.phrases.size());
  inv.topics.resize(n_topics);
  for (std::size_t r = 0; r < inv.phrases.size(); ++r) inv.topics[r % n_topics].push_back(r);
  for (const auto& topic : inv.topics) {
    double total = 0.0;
    for (std::size_t r = 0; r < topic.size(); ++r) total += 1.0 / static_cast<double>(r + 1);
    auto& cdf = inv.cdfs.emplace_back();
    double acc = 0.0;
    for (std::size_t r = 0; r < topic.size(); ++r) {
      acc += 1.0 / static_cast<double>(r + 1) / total;
      cdf.push_back(acc);
    }
    cdf.back() = 1.0;
  }
  return inv;
}

std::string make_document(const SynthConfig& cfg, const Inventory& inv, Label label, Rng& rng) {
  const std::size_t t = static_cast<std::size_t>(rng.below(inv.topics.size()));
  const auto& topic = inv.topics[t];
  const auto& cdf = inv.cdfs[t];
  const std::size_t n_phrases =
      cfg.min_phrases + static_cast<std::size_t>(rng.below(cfg.max_phrases - cfg.min_phrases + 1));
  std::vector<std::vector<std::string>> slots(n_phrases + 1);
  for (std::size_t k = 0; k < cfg.keywords_per_doc; ++k) {
    const bool own = rng.bernoulli(cfg.keyword_strength);
    const bool fake = (label == Label::Fake) == own;
    const auto& pool = fake ? inv.fake_keywords : inv.real_keywords;
    slots[static_cast<std::size_t>(rng.below(slots.size()))].push_back(pool[rng.below(pool.size())]);
  }
  std::string text;
  auto append = [&](const std::string& w) {
    if (!text.empty()) text.push_back(' ');
    text += w;
  };
  for (std::size_t p = 0; p <= n_phrases; ++p) {
    for (const auto& w : slots[p]) append(w);
    if (p == n_phrases) break;
    const double u = rng.uniform();
    std::size_t r = 0;
    while (cdf[r] < u) ++r;
    for (const auto& w : inv.phrases[topic[r]]) append(w);
  }
  text.push_back('.');
  return text;
}

Corpus generate(const SynthConfig& cfg, std::size_t count, std::uint64_t stream, const std::string& id_prefix) {
  cfg.validate();
  const Inventory inv = make_inventory(cfg);
  Rng rng(mix_seed(cfg.seed, stream));
  std::vector<Label> labels;
  for (std::size_t i = 0; i < count; ++i) labels.push_back(i % 2 == 0 ? Label::Fake : Label::Real);
  rng.shuffle(labels);
  std::vector<Document> docs;
  docs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Document d;
    d.id = id_prefix + std::to_string(i);
    d.label = labels[i];
    d.text = make_document(cfg, inv, labels[i], rng);
    docs.push_back(std::move(d));
  }
  return Corpus(std::move(docs));
}

}  // namespace

void SynthConfig::validate() const {
  if (num_docs == 0) throw ConfigError("synth: num_docs must be positive");
  if (keywords_per_class == 0 || phrase_length == 0) throw ConfigError("synth: empty keyword or phrase sets");
  if (vocab_words < 2 * keywords_per_class + phrase_length)
    throw ConfigError("synth: vocab_words too small for the keyword and phrase layout");
  if (!(keyword_strength >= 0.0 && keyword_strength <= 1.0)) throw ConfigError("synth: keyword_strength must be in [0,1]");
  if (num_topics == 0) throw ConfigError("synth: num_topics must be positive");
  if (min_phrases == 0 || max_phrases < min_phrases) throw ConfigError("synth: invalid phrase count range");
}

std::vector<std::string> synth_words(const SynthConfig& cfg) {
  Rng rng(mix_seed(cfg.seed, 0x5eed));
  std::set<std::string> seen;
  std::vector<std::string> words;
  auto syllable = [&] {
    std::string s;
    s.push_back(kConsonants[rng.below(kConsonants.size())]);
    s.push_back(kVowels[rng.below(kVowels.size())]);
    return s;
  };
  while (words.size() < cfg.vocab_words) {
    const std::size_t n_syllables = 2 + static_cast<std::size_t>(rng.below(2));
    std::string w;
    for (std::size_t k = 0; k < n_syllables; ++k) w += syllable();
    if (seen.insert(w).second) words.push_back(std::move(w));
  }
  return words;
}

Corpus synth_corpus(const SynthConfig& cfg) { return generate(cfg, cfg.num_docs, 0, "synth-"); }

Corpus synth_heldout(const SynthConfig& cfg, std::size_t count, std::uint64_t stream) {
  return generate(cfg, count, stream + 1, "heldout" + std::to_string(stream) + "-");
}

}  // namespace fnd
