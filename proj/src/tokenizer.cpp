#include "fnd/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <stdexcept>

#include "fnd/error.hpp"

namespace fnd {

namespace {

constexpr std::size_t kMaxCharsPerWord = 100;

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_punct(unsigned char c) { return c < 128 && std::ispunct(c) != 0; }

// Length of the UTF-8 sequence starting with lead byte c; malformed bytes
// count as single characters.
std::size_t utf8_length(unsigned char c) {
  if (c < 0x80) return 1;
  if ((c >> 5) == 0x6) return 2;
  if ((c >> 4) == 0xE) return 3;
  if ((c >> 3) == 0x1E) return 4;
  return 1;
}

std::vector<std::string_view> split_chars(std::string_view word) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < word.size()) {
    const std::size_t n =
        std::min(utf8_length(static_cast<unsigned char>(word[i])), word.size() - i);
    out.push_back(word.substr(i, n));
    i += n;
  }
  return out;
}

template <typename Key>
std::vector<Key> by_count_then_key(const std::map<Key, std::size_t>& counts,
                                   std::size_t min_count) {
  std::vector<std::pair<Key, std::size_t>> items;
  for (const auto& [k, c] : counts)
    if (c >= min_count) items.emplace_back(k, c);
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<Key> out;
  out.reserve(items.size());
  for (auto& [k, c] : items) out.push_back(std::move(k));
  return out;
}

}  // namespace

Vocabulary::Vocabulary()
    : Vocabulary(std::vector<std::string>(std::begin(kSpecialTokens), std::end(kSpecialTokens))) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.size() < kNumSpecials)
    throw ConfigError("vocabulary must start with the 5 special tokens");
  for (int i = 0; i < kNumSpecials; ++i)
    if (tokens_[i] != kSpecialTokens[i])
      throw ConfigError("vocabulary entry " + std::to_string(i) + " must be " +
                        std::string(kSpecialTokens[i]));
  ids_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const auto& t = tokens_[i];
    if (t.empty() || t == "##") throw ConfigError("empty vocabulary token at line " + std::to_string(i + 1));
    if (!ids_.emplace(t, static_cast<TokenId>(i)).second)
      throw ConfigError("duplicate vocabulary token '" + t + "' at line " + std::to_string(i + 1));
  }
}

bool Vocabulary::contains(std::string_view token) const {
  return ids_.find(std::string(token)) != ids_.end();
}

TokenId Vocabulary::id_of(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::token_of(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
    throw std::out_of_range("token id " + std::to_string(id) + " outside vocabulary of size " +
                            std::to_string(tokens_.size()));
  return tokens_[static_cast<std::size_t>(id)];
}

std::uint64_t Vocabulary::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (const auto& t : tokens_) {
    for (unsigned char c : t) feed(c);
    feed('\n');
  }
  return h;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read vocabulary " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return Vocabulary(std::move(tokens));
}

std::vector<std::string> pre_tokenize(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) words.push_back(std::move(current));
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_space(c)) {
      flush();
    } else if (is_punct(c)) {
      flush();
      words.emplace_back(1, ch);
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return words;
}

Vocabulary build_vocab(const Corpus& corpus, std::size_t max_size, std::size_t min_freq) {
  if (max_size < kNumSpecials + 1)
    throw ConfigError("vocabulary max_size must be at least 6");
  if (min_freq == 0) throw ConfigError("min_freq must be >= 1");
  if (corpus.empty()) throw DataError("cannot build a vocabulary from an empty corpus");

  std::map<std::string, std::size_t> word_counts;
  std::map<std::string, std::size_t> char_counts;
  for (const auto& doc : corpus.documents()) {
    for (auto& word : pre_tokenize(doc.text)) {
      for (auto ch : split_chars(word)) ++char_counts[std::string(ch)];
      ++word_counts[std::move(word)];
    }
  }

  std::vector<std::string> tokens(std::begin(kSpecialTokens), std::end(kSpecialTokens));
  std::unordered_map<std::string, bool> seen;
  auto admit = [&](std::string token) {
    if (tokens.size() >= max_size) return;
    if (seen.emplace(token, true).second) tokens.push_back(std::move(token));
  };

  const auto chars = by_count_then_key(char_counts, 1);
  for (const auto& c : chars) admit(c);
  for (const auto& c : chars) admit("##" + c);
  for (const auto& w : by_count_then_key(word_counts, min_freq)) admit(w);
  return Vocabulary(std::move(tokens));
}

std::vector<std::string> wordpiece_tokenize(std::string_view text, const Vocabulary& vocab) {
  std::vector<std::string> out;
  for (const auto& word : pre_tokenize(text)) {
    const auto chars = split_chars(word);
    if (chars.size() > kMaxCharsPerWord) {
      out.emplace_back(kSpecialTokens[kUnkId]);
      continue;
    }
    // Byte offsets of character boundaries.
    std::vector<std::size_t> offsets{0};
    for (auto c : chars) offsets.push_back(offsets.back() + c.size());

    std::vector<std::string> pieces;
    std::size_t start = 0;
    bool bad = false;
    while (start < chars.size()) {
      std::size_t end = chars.size();
      std::string match;
      while (end > start) {
        std::string candidate = word.substr(offsets[start], offsets[end] - offsets[start]);
        if (start > 0) candidate.insert(0, "##");
        if (vocab.contains(candidate)) {
          match = std::move(candidate);
          break;
        }
        --end;
      }
      if (match.empty()) {
        bad = true;
        break;
      }
      pieces.push_back(std::move(match));
      start = end;
    }
    if (bad) {
      out.emplace_back(kSpecialTokens[kUnkId]);
    } else {
      for (auto& p : pieces) out.push_back(std::move(p));
    }
  }
  return out;
}

TokenSequence encode(std::string_view text, const Vocabulary& vocab, std::size_t max_len) {
  if (max_len < 3) throw ConfigError("max_len must be >= 3");
  const auto pieces = wordpiece_tokenize(text, vocab);
  const std::size_t kept = std::min(pieces.size(), max_len - 2);

  TokenSequence seq;
  seq.ids.assign(max_len, kPadId);
  seq.mask.assign(max_len, 0);
  seq.ids[0] = kClsId;
  for (std::size_t i = 0; i < kept; ++i) seq.ids[i + 1] = vocab.id_of(pieces[i]);
  seq.ids[kept + 1] = kSepId;
  seq.true_length = kept + 2;
  std::fill_n(seq.mask.begin(), seq.true_length, 1);
  return seq;
}

std::vector<TokenSequence> encode_all(const Corpus& corpus, const Vocabulary& vocab,
                                      std::size_t max_len) {
  std::vector<TokenSequence> out;
  out.reserve(corpus.size());
  for (const auto& doc : corpus.documents()) out.push_back(encode(doc.text, vocab, max_len));
  return out;
}

std::vector<std::string> decode(std::span<const TokenId> ids, const Vocabulary& vocab) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (TokenId id : ids) out.push_back(vocab.token_of(id));
  return out;
}

}  // namespace fnd
