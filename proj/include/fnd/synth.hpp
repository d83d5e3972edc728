#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fnd/corpus.hpp"

namespace fnd {

/// Generator for a labeled corpus with planted class-correlated keywords.
///
/// The word inventory is split into `keywords_per_class` Fake keywords,
/// as many Real keywords, and neutral words grouped into fixed phrases of
/// `phrase_length` words. Phrases are dealt round-robin into `num_topics`
/// topics. A document picks one topic uniformly, then a run of phrases drawn
/// Zipf(1) by rank within that topic, with `keywords_per_doc` keywords
/// inserted at phrase boundaries; each keyword comes from the document's own
/// class with probability `keyword_strength`, otherwise from the other class.
/// Topics are independent of the label.
struct SynthConfig {
  std::size_t num_docs = 2000;
  std::size_t vocab_words = 200;
  std::size_t keywords_per_class = 20;
  std::size_t keywords_per_doc = 5;
  double keyword_strength = 0.9;
  std::size_t phrase_length = 4;
  std::size_t min_phrases = 3;
  std::size_t max_phrases = 6;
  std::size_t num_topics = 20;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Word inventory depends only on vocab_words and seed.
std::vector<std::string> synth_words(const SynthConfig& cfg);

/// Balanced classes (alternating labels, then shuffled); ids `synth-<n>`.
Corpus synth_corpus(const SynthConfig& cfg);

/// Draws `count` more documents from the same word inventory and phrase
/// table as `cfg` but an independent stream (for held-out sets).
Corpus synth_heldout(const SynthConfig& cfg, std::size_t count, std::uint64_t stream);

}  // namespace fnd
