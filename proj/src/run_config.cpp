#include "fnd/run_config.hpp"

#include "fnd/error.hpp"

namespace fnd {

RunConfig RunConfig::resolve(const KeyValues& file, const KeyValues& overrides) {
  KeyValues kv = file;
  kv.merge(overrides);

  RunConfig rc;
  rc.data = kv.get_string("data.path", "");
  const std::string format = kv.get_string("data.format", "csv");
  const auto f = parse_corpus_format(format);
  if (!f) throw ConfigError("unknown data.format '" + format + "' (csv|dirs)");
  rc.format = *f;

  rc.split.train_fraction = kv.get_double("split.train_fraction", rc.split.train_fraction);
  rc.split.val_fraction = kv.get_double("split.val_fraction", rc.split.val_fraction);
  rc.split.test_fraction = kv.get_double("split.test_fraction", rc.split.test_fraction);
  rc.split.seed = kv.get_uint("split.seed", rc.split.seed);

  rc.vocab_max_size = kv.get_uint("tokenizer.max_size", rc.vocab_max_size);
  rc.vocab_min_freq = kv.get_uint("tokenizer.min_freq", rc.vocab_min_freq);

  rc.model = ModelConfig::from_key_values(kv);
  TrainConfig defaults;
  defaults.learning_rate = default_learning_rate(rc.model.arch);
  rc.train = TrainConfig::from_key_values(kv, defaults);
  return rc;
}

KeyValues RunConfig::to_key_values() const {
  KeyValues kv;
  kv.set("data.path", data.string());
  kv.set("data.format", format == CorpusFormat::Csv ? "csv" : "dirs");
  kv.set("split.train_fraction", format_double(split.train_fraction));
  kv.set("split.val_fraction", format_double(split.val_fraction));
  kv.set("split.test_fraction", format_double(split.test_fraction));
  kv.set("split.seed", std::to_string(split.seed));
  kv.set("tokenizer.max_size", std::to_string(vocab_max_size));
  kv.set("tokenizer.min_freq", std::to_string(vocab_min_freq));
  kv.merge(model.to_key_values());
  kv.merge(train.to_key_values());
  return kv;
}

void RunConfig::validate() const {
  split.validate();
  train.validate();
  if (vocab_max_size < 6) throw ConfigError("tokenizer.max_size must be at least 6");
  if (vocab_min_freq == 0) throw ConfigError("tokenizer.min_freq must be positive");
}

}  // namespace fnd
