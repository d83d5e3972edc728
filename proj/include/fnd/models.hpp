#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fnd/autograd.hpp"
#include "fnd/corpus.hpp"
#include "fnd/keyvalue.hpp"
#include "fnd/random.hpp"
#include "fnd/tokenizer.hpp"

namespace fnd {

enum class Arch { Cnn, Lstm, BiLstm, CnnBiLstm, Transformer };
enum class Variant { BertStyle, RobertaStyle };
enum class Mode { Train, Eval };

inline constexpr std::array<Arch, 5> kAllArchs = {Arch::Cnn, Arch::Lstm, Arch::BiLstm,
                                                  Arch::CnnBiLstm, Arch::Transformer};

/// cnn, lstm, bilstm, cnn-bilstm, transformer
std::string_view arch_name(Arch arch);
std::optional<Arch> parse_arch(std::string_view name);
std::string_view variant_name(Variant variant);
std::optional<Variant> parse_variant(std::string_view name);

inline constexpr std::array<int, 3> kCnnKernelSizes = {3, 4, 5};
inline constexpr int kHybridKernelSize = 3;
inline constexpr double kLayerNormEps = 1e-5;

struct ModelConfig {
  Arch arch = Arch::Transformer;
  std::size_t vocab_size = 0;
  std::size_t max_len = 128;
  std::size_t embed_dim = 64;
  std::size_t hidden_dim = 64;
  std::size_t num_layers = 2;
  std::size_t num_heads = 4;
  std::size_t ffn_dim = 128;
  double dropout_rate = 0.1;
  Variant variant = Variant::BertStyle;
  // Hybrid only: false gives the unidirectional CNN-LSTM.
  bool bidirectional = true;
  std::size_t num_classes = 2;
  std::uint64_t seed = 42;

  /// Throws ConfigError.
  void validate() const;

  /// Keys prefixed with `model.`; includes the fixed tokenizer and block-order tags.
  KeyValues to_key_values() const;
  /// Reads `model.*` keys over the defaults above.
  static ModelConfig from_key_values(const KeyValues& kv);

  std::size_t head_dim() const { return embed_dim / num_heads; }
  std::size_t cnn_filters_per_kernel() const { return hidden_dim / kCnnKernelSizes.size(); }

  bool operator==(const ModelConfig&) const = default;
};

/// A classifier instance: configuration, named parameters, and the train/eval
/// switch. Parameter creation order (and so the order of initialization
/// draws) is listed in docs/parameters.md.
class Model {
 public:
  /// Glorot-uniform weights, zero biases, Normal(0, 0.02) embeddings, unit
  /// layer-norm gains; all draws from an Rng seeded with config.seed.
  explicit Model(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  ad::ParameterSet& params() { return params_; }
  const ad::ParameterSet& params() const { return params_; }
  ad::Node& param(std::string_view name) { return params_.at(name); }

  Mode mode() const { return mode_; }
  void set_mode(Mode mode) { mode_ = mode; }
  bool training() const { return mode_ == Mode::Train; }

  /// Effective dropout rate: zero in Eval mode.
  double active_dropout() const { return training() ? config_.dropout_rate : 0.0; }
  Rng& dropout_rng() { return dropout_rng_; }
  void reseed_dropout(std::uint64_t seed) { dropout_rng_ = Rng(seed); }

  /// Copies parameter values (not gradients) from a model with the same config.
  void copy_parameters_from(const Model& other);

 private:
  ModelConfig config_;
  ad::ParameterSet params_;
  Mode mode_ = Mode::Train;
  Rng dropout_rng_;
};

Model init_model(const ModelConfig& config);

/// Token + learned positional (+ token-type for BertStyle transformers)
/// embedding of the first `length` positions -> [length x embed_dim].
ad::Node embed(Model& model, const TokenSequence& seq, std::size_t length);

/// Full padded sequences -> one [max_len x embed_dim] node per sequence.
std::vector<ad::Node> embed(Model& model, std::span<const TokenSequence> batch);

/// Each returns logits [batch x 2]. Throws ConfigError on an arch mismatch.
ad::Node forward_cnn(Model& model, std::span<const TokenSequence> batch);
ad::Node forward_lstm(Model& model, std::span<const TokenSequence> batch);
ad::Node forward_bilstm(Model& model, std::span<const TokenSequence> batch);
ad::Node forward_cnn_bilstm(Model& model, std::span<const TokenSequence> batch);

/// Attention probabilities recorded during a transformer forward pass:
/// probs[layer][sequence][head] is [L x L] where L is the padded batch length.
struct AttentionTrace {
  std::vector<std::vector<std::vector<Matrix>>> probs;
  std::size_t padded_length = 0;
};

ad::Node forward_transformer(Model& model, std::span<const TokenSequence> batch,
                             AttentionTrace* trace = nullptr);

/// Dispatches on config().arch.
ad::Node forward(Model& model, std::span<const TokenSequence> batch);

/// Final transformer hidden states for the batch stacked as [B*L x embed_dim],
/// L = longest true_length in the batch; sequence b occupies rows [b*L, (b+1)*L).
struct EncoderOutput {
  ad::Node hidden;
  std::size_t padded_length = 0;
};
EncoderOutput transformer_encode(Model& model, std::span<const TokenSequence> batch,
                                 AttentionTrace* trace = nullptr);

/// BiLSTM stack over an input sequence [T x in] using the `prefix` parameter
/// group. Returns the per-position outputs of the top layer [T x 2H] (or
/// [T x H] when unidirectional).
ad::Node recurrent_stack(Model& model, const ad::Node& input, std::string_view prefix,
                         bool bidirectional);

struct Prediction {
  Label label = Label::Real;
  std::array<double, 2> probabilities{0.5, 0.5};

  double confidence() const { return probabilities[static_cast<int>(label)]; }
};

/// Requires Eval mode. Exactly equal probabilities resolve to class 0 (Real).
Prediction predict(Model& model, std::string_view text, const Vocabulary& vocab);
Prediction predict(Model& model, const TokenSequence& seq);

/// Positions in (0, true_length - 1) chosen for masking: max(1, floor(rate * n))
/// distinct content positions, drawn without replacement. Throws DataError
/// when the sequence has no content tokens.
std::vector<std::size_t> choose_mask_positions(const TokenSequence& seq, double mask_rate, Rng& rng);

/// Static (BertStyle) masks depend only on the sequence index; dynamic
/// (RobertaStyle) masks are redrawn for every epoch.
class MlmMasker {
 public:
  MlmMasker(Variant variant, std::uint64_t seed, double mask_rate);

  std::vector<std::size_t> positions(const TokenSequence& seq, std::size_t sequence_index,
                                     std::size_t epoch) const;

  double mask_rate() const { return mask_rate_; }

 private:
  Variant variant_;
  std::uint64_t seed_;
  double mask_rate_;
};

/// Masked-token loss: replaces the given positions with [MASK], encodes, and
/// scores each masked position against the tied token-embedding output layer.
ad::Node mlm_loss(Model& model, std::span<const TokenSequence> batch,
                  std::span<const std::vector<std::size_t>> positions);

/// Draws positions with `rng` then returns mlm_loss.
ad::Node mlm_pretrain_step(Model& model, std::span<const TokenSequence> batch, double mask_rate,
                           Rng& rng);

}  // namespace fnd
