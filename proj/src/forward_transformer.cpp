#include <algorithm>
#include <cmath>

#include "fnd/error.hpp"
#include "fnd/models.hpp"
#include "fnd/ops.hpp"

namespace fnd {

namespace {

ad::Node affine(Model& model, const ad::Node& x, const std::string& prefix) {
  return ad::add(ad::matmul(x, model.param(prefix + ".weight")), model.param(prefix + ".bias"));
}

ad::Node norm(Model& model, const ad::Node& x, const std::string& prefix) {
  return ad::layer_norm(x, model.param(prefix + ".gamma"), model.param(prefix + ".beta"), kLayerNormEps);
}

// Additive key mask: 0 for real tokens, kMaskedScore for padding columns.
Matrix key_mask(const TokenSequence& seq, Eigen::Index padded) {
  Matrix m = Matrix::Zero(padded, padded);
  const auto valid = static_cast<Eigen::Index>(seq.true_length);
  if (valid < padded) m.rightCols(padded - valid).setConstant(kMaskedScore);
  return m;
}

ad::Node self_attention(Model& model, const ad::Node& x, std::span<const TokenSequence> batch,
                        Eigen::Index padded, const std::string& prefix,
                        std::vector<std::vector<Matrix>>* trace) {
  const auto& c = model.config();
  const auto heads = static_cast<Eigen::Index>(c.num_heads);
  const auto d = static_cast<Eigen::Index>(c.head_dim());
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));

  const ad::Node q_all = affine(model, x, prefix + ".query");
  const ad::Node k_all = ad::matmul(x, model.param(prefix + ".key.weight"));
  const ad::Node v_all = affine(model, x, prefix + ".value");

  std::vector<ad::Node> per_sequence;
  per_sequence.reserve(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Eigen::Index start = static_cast<Eigen::Index>(b) * padded;
    const ad::Node q = ad::rows(q_all, start, padded);
    const ad::Node k = ad::rows(k_all, start, padded);
    const ad::Node v = ad::rows(v_all, start, padded);
    const Matrix mask = key_mask(batch[b], padded);
    if (trace) trace->emplace_back();

    std::vector<ad::Node> head_outputs;
    head_outputs.reserve(static_cast<std::size_t>(heads));
    for (Eigen::Index h = 0; h < heads; ++h) {
      const ad::Node qh = ad::cols(q, h * d, d);
      const ad::Node kh = ad::cols(k, h * d, d);
      const ad::Node vh = ad::cols(v, h * d, d);
      ad::Node scores = ad::scale(ad::matmul(qh, ad::transpose(kh)), scale);
      scores = ad::add_constant(scores, mask);
      const ad::Node probs = ad::softmax(scores, 1);
      if (trace) trace->back().push_back(probs.value());
      head_outputs.push_back(ad::matmul(probs, vh));
    }
    per_sequence.push_back(ad::hconcat(head_outputs));
  }
  return affine(model, ad::vconcat(per_sequence), prefix + ".output");
}

}  // namespace

EncoderOutput transformer_encode(Model& model, std::span<const TokenSequence> batch,
                                 AttentionTrace* trace) {
  const auto& c = model.config();
  if (c.arch != Arch::Transformer) throw ConfigError("transformer_encode: model is not a transformer");
  if (batch.empty()) throw ShapeError("transformer_encode: empty batch");

  // Pad only to the longest sequence in the batch: padded rows never reach a
  // real position because their keys are masked.
  std::size_t padded = 0;
  for (const auto& seq : batch) {
    if (seq.true_length < 1) throw ShapeError("transformer_encode: empty sequence");
    padded = std::max(padded, seq.true_length);
  }
  const auto L = static_cast<Eigen::Index>(padded);

  std::vector<ad::Node> embedded;
  embedded.reserve(batch.size());
  for (const auto& seq : batch) embedded.push_back(embed(model, seq, padded));
  ad::Node x = norm(model, ad::vconcat(embedded), "embed.ln");
  const double rate = model.active_dropout();
  x = ad::dropout(x, rate, model.dropout_rng());

  if (trace) {
    trace->probs.clear();
    trace->padded_length = padded;
  }
  for (std::size_t l = 0; l < c.num_layers; ++l) {
    const std::string p = "layer" + std::to_string(l);
    std::vector<std::vector<Matrix>>* layer_trace = nullptr;
    if (trace) layer_trace = &trace->probs.emplace_back();

    ad::Node attn = self_attention(model, x, batch, L, p + ".attn", layer_trace);
    attn = ad::dropout(attn, rate, model.dropout_rng());
    x = norm(model, ad::add(x, attn), p + ".attn.ln");

    ad::Node ff = ad::gelu(affine(model, x, p + ".ffn.in"));
    ff = affine(model, ff, p + ".ffn.out");
    ff = ad::dropout(ff, rate, model.dropout_rng());
    x = norm(model, ad::add(x, ff), p + ".ffn.ln");
  }
  return {x, padded};
}

ad::Node forward_transformer(Model& model, std::span<const TokenSequence> batch, AttentionTrace* trace) {
  const EncoderOutput enc = transformer_encode(model, batch, trace);
  const auto L = static_cast<Eigen::Index>(enc.padded_length);
  std::vector<ad::Node> cls;
  cls.reserve(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b)
    cls.push_back(ad::rows(enc.hidden, static_cast<Eigen::Index>(b) * L, 1));
  ad::Node pooled = ad::tanh(affine(model, ad::vconcat(cls), "pooler"));
  pooled = ad::dropout(pooled, model.active_dropout(), model.dropout_rng());
  return affine(model, pooled, "head");
}

}  // namespace fnd
