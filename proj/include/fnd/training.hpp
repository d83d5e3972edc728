#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fnd/models.hpp"
#include "fnd/tokenizer.hpp"

namespace fnd {

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  std::uint64_t seed = 42;
  bool shuffle = true;
  std::optional<std::size_t> early_stop_patience;

  void validate() const;

  /// Keys prefixed with `train.`.
  KeyValues to_key_values() const;
  static TrainConfig from_key_values(const KeyValues& kv, const TrainConfig& defaults);
};

/// 1e-3 for the recurrent and convolutional baselines, 3e-4 for the transformer.
double default_learning_rate(Arch arch);

/// Encoded documents with their class indices.
struct LabeledSet {
  std::vector<TokenSequence> sequences;
  std::vector<int> labels;

  std::size_t size() const { return sequences.size(); }
  bool empty() const { return sequences.empty(); }
};

LabeledSet encode_labeled(const Corpus& corpus, const Vocabulary& vocab, std::size_t max_len);

struct AdamState {
  std::map<std::string, Matrix> m;
  std::map<std::string, Matrix> v;
  std::uint64_t t = 0;

  bool operator==(const AdamState&) const = default;
};

/// One bias-corrected Adam update of every parameter from its gradient.
/// Throws DivergenceError (epoch/batch -1) on a non-finite gradient.
void adam_step(ad::ParameterSet& params, AdamState& state, const TrainConfig& cfg);

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainingCurves {
  std::vector<EpochMetrics> per_epoch;
};

struct LossAccuracy {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// One pass of shuffled mini-batch training. Loss and accuracy are
/// example-weighted means of the per-batch values measured before each update.
/// `epoch` seeds the shuffle and labels divergence diagnostics.
LossAccuracy train_epoch(Model& model, const LabeledSet& train, const TrainConfig& cfg,
                         AdamState& state, std::size_t epoch);

/// Eval-mode loss and accuracy; leaves the model in its previous mode.
LossAccuracy evaluate_loss(Model& model, const LabeledSet& data, std::size_t batch_size);

/// Eval-mode argmax predictions.
std::vector<int> predict_labels(Model& model, const LabeledSet& data, std::size_t batch_size);

/// Counts epochs without improvement of the best validation loss.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::optional<std::size_t> patience) : patience_(patience) {}

  /// Records one epoch; returns true when training should stop.
  bool update(double val_loss);
  bool improved() const { return improved_; }
  double best() const { return best_; }

 private:
  std::optional<std::size_t> patience_;
  double best_ = 0.0;
  bool has_best_ = false;
  bool improved_ = false;
  std::size_t stale_ = 0;
};

struct FitResult {
  TrainingCurves curves;
  AdamState optimizer;
  std::size_t best_epoch = 0;
};

/// Trains, validates every epoch in Eval mode, stops early per the config,
/// and leaves the model holding the parameters of the best validation epoch
/// (the last epoch when `val` is empty). The model ends in Eval mode.
FitResult fit(Model& model, const LabeledSet& train, const LabeledSet& val, const TrainConfig& cfg,
              const std::function<void(const EpochMetrics&)>& on_epoch = {});

/// `epoch,train_loss,train_acc,val_loss,val_acc` with 6 significant digits.
void export_curves(const TrainingCurves& curves, const std::filesystem::path& path);
TrainingCurves load_curves(const std::filesystem::path& path);

struct MlmConfig {
  std::size_t steps = 200;
  std::size_t batch_size = 64;
  double learning_rate = 3e-3;
  double mask_rate = 0.15;
  std::uint64_t seed = 7;
};

/// Masked-token pretraining of a transformer; returns the loss of every step.
/// Masks come from MlmMasker, so BertStyle reuses one mask per sequence while
/// RobertaStyle redraws them each pass over the data.
std::vector<double> pretrain_mlm(Model& model, const std::vector<TokenSequence>& data, const MlmConfig& cfg);

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelConfig config;
  std::uint64_t vocab_hash = 0;
  std::map<std::string, Matrix> parameters;
  std::optional<AdamState> optimizer;

  /// Builds a model with these parameters, in Eval mode.
  Model to_model() const;
};

/// Binary layout (little-endian): magic "FNDCKPT1", u32 version, u64 config
/// length + key=value config text, u64 vocab hash, u32 parameter count, then
/// per parameter u32 name length + name, u32 rows, u32 cols, f64 data
/// (row-major); then u8 has_optimizer and, if set, u64 step and every m then v
/// matrix in parameter order.
void save_checkpoint(const Model& model, const AdamState* state, std::uint64_t vocab_hash,
                     const std::filesystem::path& path);

/// Throws DataError on bad magic, unknown version, or truncation.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// As above, and throws ConfigError unless the stored config equals `expected`.
Checkpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected);

}  // namespace fnd
