#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fnd/corpus.hpp"

namespace fnd {

using TokenId = std::int32_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;
inline constexpr TokenId kClsId = 2;
inline constexpr TokenId kSepId = 3;
inline constexpr TokenId kMaskId = 4;
inline constexpr int kNumSpecials = 5;

inline constexpr std::string_view kSpecialTokens[kNumSpecials] = {
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};

inline bool is_special(TokenId id) { return id >= 0 && id < kNumSpecials; }

/// Bijection between subword strings and dense ids. Ids 0..4 are always the
/// special tokens; continuation pieces carry a `##` prefix.
class Vocabulary {
 public:
  /// Only the five special tokens.
  Vocabulary();

  /// Throws ConfigError on duplicates, empty tokens, or missing specials.
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  bool contains(std::string_view token) const;
  /// kUnkId when absent.
  TokenId id_of(std::string_view token) const;
  /// Throws std::out_of_range for ids outside [0, size).
  const std::string& token_of(TokenId id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// FNV-1a over the newline-joined token list.
  std::uint64_t content_hash() const;

  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

/// Admits specials, then every character seen (bare and `##`-prefixed), then
/// whole words with count >= min_freq by (count desc, token asc) until
/// max_size is reached.
Vocabulary build_vocab(const Corpus& corpus, std::size_t max_size, std::size_t min_freq);

/// Lowercase, then split on whitespace and around ASCII punctuation.
std::vector<std::string> pre_tokenize(std::string_view text);

/// Greedy longest-match segmentation. A word with any unmatched position, or
/// longer than 100 characters, becomes a single [UNK].
std::vector<std::string> wordpiece_tokenize(std::string_view text, const Vocabulary& vocab);

struct TokenSequence {
  std::vector<TokenId> ids;
  std::vector<std::uint8_t> mask;
  std::size_t true_length = 0;

  std::size_t max_len() const { return ids.size(); }
  bool operator==(const TokenSequence&) const = default;
};

/// [CLS] + pieces truncated to max_len - 2 + [SEP], then [PAD] up to max_len.
TokenSequence encode(std::string_view text, const Vocabulary& vocab, std::size_t max_len);

std::vector<TokenSequence> encode_all(const Corpus& corpus, const Vocabulary& vocab,
                                      std::size_t max_len);

std::vector<std::string> decode(std::span<const TokenId> ids, const Vocabulary& vocab);

}  // namespace fnd
