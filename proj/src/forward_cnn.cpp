#include <algorithm>

#include "fnd/error.hpp"
#include "fnd/models.hpp"
#include "fnd/ops.hpp"

namespace fnd {

namespace {

ad::Node affine(Model& model, const ad::Node& x, const std::string& prefix) {
  return ad::add(ad::matmul(x, model.param(prefix + ".weight")), model.param(prefix + ".bias"));
}

}  // namespace

// Convolutions only see positions [0, true_length). A sequence shorter than a
// kernel is zero-padded up to the kernel width, giving exactly one window.
// Pooling over valid windows alone is equivalent to masking PAD windows with
// a -inf surrogate before the max.
ad::Node forward_cnn(Model& model, std::span<const TokenSequence> batch) {
  if (model.config().arch != Arch::Cnn) throw ConfigError("forward_cnn: model is not a cnn");
  std::vector<ad::Node> features;
  features.reserve(batch.size());
  for (const auto& seq : batch) {
    const ad::Node x = embed(model, seq, seq.true_length);
    std::vector<ad::Node> pooled;
    for (int k : kCnnKernelSizes) {
      const std::string p = "conv" + std::to_string(k);
      const ad::Node padded = ad::pad_rows(x, std::max<Eigen::Index>(x.rows(), k));
      ad::Node h = ad::conv1d(padded, model.param(p + ".weight"), k);
      h = ad::relu(ad::add(h, model.param(p + ".bias")));
      pooled.push_back(ad::max_pool1d(h));
    }
    features.push_back(ad::hconcat(pooled));
  }
  ad::Node h = ad::vconcat(features);
  h = ad::dropout(h, model.active_dropout(), model.dropout_rng());
  return affine(model, h, "head");
}

}  // namespace fnd
