#include <algorithm>
#include <cmath>

#include "fnd/error.hpp"
#include "fnd/models.hpp"
#include "fnd/ops.hpp"

namespace fnd {

namespace {

constexpr double kEmbeddingStddev = 0.02;

class Initializer {
 public:
  Initializer(ad::ParameterSet& params, std::uint64_t seed) : params_(params), rng_(seed) {}

  void glorot(const std::string& name, Eigen::Index rows, Eigen::Index cols, double fan_in,
              double fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng_.uniform(-limit, limit);
    params_.add(name, std::move(m));
  }
  void glorot(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    glorot(name, rows, cols, static_cast<double>(rows), static_cast<double>(cols));
  }
  void normal(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng_.normal(0.0, kEmbeddingStddev);
    params_.add(name, std::move(m));
  }
  void zeros(const std::string& name, Eigen::Index cols) { params_.add(name, Matrix::Zero(1, cols)); }
  void ones(const std::string& name, Eigen::Index cols) { params_.add(name, Matrix::Ones(1, cols)); }

  void affine(const std::string& prefix, Eigen::Index in, Eigen::Index out) {
    glorot(prefix + ".weight", in, out);
    zeros(prefix + ".bias", out);
  }
  void layer_norm(const std::string& prefix, Eigen::Index width) {
    ones(prefix + ".gamma", width);
    zeros(prefix + ".beta", width);
  }

  void recurrent_stack(const std::string& prefix, Eigen::Index in, Eigen::Index hidden,
                       std::size_t layers, bool bidirectional) {
    for (std::size_t l = 0; l < layers; ++l) {
      const Eigen::Index layer_in = l == 0 ? in : (bidirectional ? 2 * hidden : hidden);
      for (const char* dir : {"fwd", "bwd"}) {
        if (!bidirectional && std::string_view(dir) == "bwd") continue;
        const std::string p = prefix + ".l" + std::to_string(l) + "." + dir;
        glorot(p + ".w_ih", layer_in, 4 * hidden);
        glorot(p + ".w_hh", hidden, 4 * hidden);
        zeros(p + ".bias", 4 * hidden);
      }
    }
  }

 private:
  ad::ParameterSet& params_;
  Rng rng_;
};

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

}  // namespace

Model::Model(ModelConfig config) : config_(std::move(config)), dropout_rng_(mix_seed(config_.seed, 1)) {
  config_.validate();
  const auto& c = config_;
  const Eigen::Index V = idx(c.vocab_size), E = idx(c.embed_dim), H = idx(c.hidden_dim);
  Initializer init(params_, c.seed);

  init.normal("embed.token", V, E);
  init.normal("embed.position", idx(c.max_len), E);

  Eigen::Index head_in = 0;
  switch (c.arch) {
    case Arch::Cnn: {
      const Eigen::Index F = idx(c.cnn_filters_per_kernel());
      for (int k : kCnnKernelSizes) {
        const std::string p = "conv" + std::to_string(k);
        init.glorot(p + ".weight", k * E, F, static_cast<double>(k * E), static_cast<double>(k * F));
        init.zeros(p + ".bias", F);
      }
      head_in = F * idx(kCnnKernelSizes.size());
      break;
    }
    case Arch::Lstm:
      init.recurrent_stack("lstm", E, H, c.num_layers, false);
      head_in = H;
      break;
    case Arch::BiLstm:
      init.recurrent_stack("lstm", E, H, c.num_layers, true);
      head_in = 2 * H;
      break;
    case Arch::CnnBiLstm:
      init.glorot("conv.weight", kHybridKernelSize * E, H, static_cast<double>(kHybridKernelSize * E),
                  static_cast<double>(kHybridKernelSize * H));
      init.zeros("conv.bias", H);
      init.recurrent_stack("lstm", H, H, c.num_layers, c.bidirectional);
      head_in = c.bidirectional ? 2 * H : H;
      break;
    case Arch::Transformer: {
      if (c.variant == Variant::BertStyle) init.normal("embed.token_type", 2, E);
      init.layer_norm("embed.ln", E);
      const Eigen::Index F = idx(c.ffn_dim);
      for (std::size_t l = 0; l < c.num_layers; ++l) {
        const std::string p = "layer" + std::to_string(l);
        init.affine(p + ".attn.query", E, E);
        // A key bias shifts every score in a softmax row equally, so it is omitted.
        init.glorot(p + ".attn.key.weight", E, E);
        init.affine(p + ".attn.value", E, E);
        init.affine(p + ".attn.output", E, E);
        init.layer_norm(p + ".attn.ln", E);
        init.affine(p + ".ffn.in", E, F);
        init.affine(p + ".ffn.out", F, E);
        init.layer_norm(p + ".ffn.ln", E);
      }
      init.affine("pooler", E, E);
      init.zeros("mlm.bias", V);
      head_in = E;
      break;
    }
  }
  init.affine("head", head_in, idx(c.num_classes));
}

void Model::copy_parameters_from(const Model& other) {
  if (!(other.config_ == config_)) throw ConfigError("copy_parameters_from: config mismatch");
  auto it = other.params_.begin();
  for (auto& [name, node] : params_) {
    node.mutable_value() = it->second.value();
    ++it;
  }
}

Model init_model(const ModelConfig& config) { return Model(config); }

ad::Node embed(Model& model, const TokenSequence& seq, std::size_t length) {
  const auto& c = model.config();
  if (length > seq.ids.size() || length > c.max_len)
    throw ShapeError("embed: length exceeds sequence or max_len");
  for (std::size_t i = 0; i < length; ++i)
    if (seq.ids[i] < 0 || static_cast<std::size_t>(seq.ids[i]) >= c.vocab_size)
      throw ShapeError("embed: token id " + std::to_string(seq.ids[i]) + " out of range");

  const std::span<const TokenId> ids(seq.ids.data(), length);
  ad::Node x = ad::gather_rows(model.param("embed.token"), ids);
  x = ad::add(x, ad::rows(model.param("embed.position"), 0, idx(length)));
  if (c.arch == Arch::Transformer && c.variant == Variant::BertStyle) {
    // Single-segment inputs: every position has token type 0.
    x = ad::add(x, ad::rows(model.param("embed.token_type"), 0, 1));
  }
  return x;
}

std::vector<ad::Node> embed(Model& model, std::span<const TokenSequence> batch) {
  std::vector<ad::Node> out;
  out.reserve(batch.size());
  for (const auto& seq : batch) out.push_back(embed(model, seq, seq.ids.size()));
  return out;
}

ad::Node forward(Model& model, std::span<const TokenSequence> batch) {
  switch (model.config().arch) {
    case Arch::Cnn: return forward_cnn(model, batch);
    case Arch::Lstm: return forward_lstm(model, batch);
    case Arch::BiLstm: return forward_bilstm(model, batch);
    case Arch::CnnBiLstm: return forward_cnn_bilstm(model, batch);
    case Arch::Transformer: return forward_transformer(model, batch);
  }
  throw ConfigError("unknown architecture");
}

Prediction predict(Model& model, const TokenSequence& seq) {
  if (model.training()) throw std::logic_error("predict requires Eval mode");
  const ad::Node logits = forward(model, std::span<const TokenSequence>(&seq, 1));
  const Matrix probs = softmax_rows(logits.value());
  Prediction p;
  p.probabilities = {probs(0, 0), probs(0, 1)};
  p.label = probs(0, 1) > probs(0, 0) ? Label::Fake : Label::Real;
  return p;
}

Prediction predict(Model& model, std::string_view text, const Vocabulary& vocab) {
  return predict(model, encode(text, vocab, model.config().max_len));
}

}  // namespace fnd
