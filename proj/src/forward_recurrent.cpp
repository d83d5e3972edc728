#include <algorithm>

#include "fnd/error.hpp"
#include "fnd/models.hpp"
#include "fnd/ops.hpp"

namespace fnd {

namespace {

// Gate columns are laid out [input | forget | output | candidate] so the three
// sigmoid gates form one contiguous block.
struct DirectionParams {
  ad::Node w_ih, w_hh, bias;
};

DirectionParams direction(Model& model, const std::string& prefix) {
  return {model.param(prefix + ".w_ih"), model.param(prefix + ".w_hh"), model.param(prefix + ".bias")};
}

// One LSTM pass over the rows of x. Returns one [1 x H] hidden state per
// input position, in input order.
std::vector<ad::Node> run_direction(const DirectionParams& p, const ad::Node& x, bool reverse) {
  const Eigen::Index T = x.rows();
  const Eigen::Index H = p.w_hh.rows();
  const ad::Node projected = ad::add(ad::matmul(x, p.w_ih), p.bias);

  std::vector<ad::Node> outputs(static_cast<std::size_t>(T));
  ad::Node h, c;
  for (Eigen::Index step = 0; step < T; ++step) {
    const Eigen::Index t = reverse ? T - 1 - step : step;
    ad::Node z = ad::rows(projected, t, 1);
    if (step > 0) z = ad::add(z, ad::matmul(h, p.w_hh));
    const ad::Node gates = ad::sigmoid(ad::cols(z, 0, 3 * H));
    const ad::Node in_gate = ad::cols(gates, 0, H);
    const ad::Node forget_gate = ad::cols(gates, H, H);
    const ad::Node out_gate = ad::cols(gates, 2 * H, H);
    const ad::Node candidate = ad::tanh(ad::cols(z, 3 * H, H));
    const ad::Node write = ad::mul(in_gate, candidate);
    c = step == 0 ? write : ad::add(ad::mul(forget_gate, c), write);
    h = ad::mul(out_gate, ad::tanh(c));
    outputs[static_cast<std::size_t>(t)] = h;
  }
  return outputs;
}

ad::Node final_representation(const ad::Node& top, std::size_t hidden, bool bidirectional) {
  const Eigen::Index H = static_cast<Eigen::Index>(hidden);
  const ad::Node last = ad::rows(top, top.rows() - 1, 1);
  if (!bidirectional) return last;
  const ad::Node parts[] = {ad::cols(last, 0, H), ad::cols(ad::rows(top, 0, 1), H, H)};
  return ad::hconcat(parts);
}

ad::Node classify(Model& model, std::vector<ad::Node> features) {
  ad::Node h = ad::vconcat(features);
  h = ad::dropout(h, model.active_dropout(), model.dropout_rng());
  return ad::add(ad::matmul(h, model.param("head.weight")), model.param("head.bias"));
}

}  // namespace

ad::Node recurrent_stack(Model& model, const ad::Node& input, std::string_view prefix,
                         bool bidirectional) {
  ad::Node x = input;
  for (std::size_t l = 0; l < model.config().num_layers; ++l) {
    const std::string p = std::string(prefix) + ".l" + std::to_string(l);
    const auto fwd = run_direction(direction(model, p + ".fwd"), x, false);
    if (!bidirectional) {
      x = ad::vconcat(fwd);
      continue;
    }
    const auto bwd = run_direction(direction(model, p + ".bwd"), x, true);
    std::vector<ad::Node> positions;
    positions.reserve(fwd.size());
    for (std::size_t t = 0; t < fwd.size(); ++t) {
      const ad::Node pair[] = {fwd[t], bwd[t]};
      positions.push_back(ad::hconcat(pair));
    }
    x = ad::vconcat(positions);
  }
  return x;
}

// The final state is read at true_length - 1, so positions past SEP never
// enter the recurrence.
ad::Node forward_lstm(Model& model, std::span<const TokenSequence> batch) {
  if (model.config().arch != Arch::Lstm) throw ConfigError("forward_lstm: model is not an lstm");
  std::vector<ad::Node> features;
  for (const auto& seq : batch) {
    const ad::Node top = recurrent_stack(model, embed(model, seq, seq.true_length), "lstm", false);
    features.push_back(final_representation(top, model.config().hidden_dim, false));
  }
  return classify(model, std::move(features));
}

ad::Node forward_bilstm(Model& model, std::span<const TokenSequence> batch) {
  if (model.config().arch != Arch::BiLstm) throw ConfigError("forward_bilstm: model is not a bilstm");
  std::vector<ad::Node> features;
  for (const auto& seq : batch) {
    const ad::Node top = recurrent_stack(model, embed(model, seq, seq.true_length), "lstm", true);
    features.push_back(final_representation(top, model.config().hidden_dim, true));
  }
  return classify(model, std::move(features));
}

// Sequences shorter than the kernel are zero-padded to kHybridKernelSize rows,
// so the recurrent stack always sees max(true_length, 3) - 2 >= 1 positions.
ad::Node forward_cnn_bilstm(Model& model, std::span<const TokenSequence> batch) {
  const auto& c = model.config();
  if (c.arch != Arch::CnnBiLstm) throw ConfigError("forward_cnn_bilstm: model is not a cnn-bilstm");
  std::vector<ad::Node> features;
  for (const auto& seq : batch) {
    ad::Node x = embed(model, seq, seq.true_length);
    x = ad::pad_rows(x, std::max<Eigen::Index>(x.rows(), kHybridKernelSize));
    x = ad::conv1d(x, model.param("conv.weight"), kHybridKernelSize);
    x = ad::relu(ad::add(x, model.param("conv.bias")));
    const ad::Node top = recurrent_stack(model, x, "lstm", c.bidirectional);
    features.push_back(final_representation(top, c.hidden_dim, c.bidirectional));
  }
  return classify(model, std::move(features));
}

}  // namespace fnd
