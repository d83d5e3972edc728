#pragma once

#include <filesystem>

#include "fnd/corpus.hpp"
#include "fnd/keyvalue.hpp"
#include "fnd/models.hpp"
#include "fnd/training.hpp"

namespace fnd {

/// Fully resolved settings of a run. Resolution order: built-in defaults,
/// then the config file, then command-line values.
struct RunConfig {
  std::filesystem::path data;
  CorpusFormat format = CorpusFormat::Csv;
  SplitSpec split;
  std::size_t vocab_max_size = 8000;
  std::size_t vocab_min_freq = 1;
  ModelConfig model;
  TrainConfig train;

  /// The learning rate falls back to default_learning_rate(arch) when neither
  /// layer sets `train.learning_rate`.
  static RunConfig resolve(const KeyValues& file, const KeyValues& overrides);

  KeyValues to_key_values() const;

  void validate() const;
};

}  // namespace fnd
