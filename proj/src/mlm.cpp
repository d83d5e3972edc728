#include <algorithm>
#include <cmath>

#include "fnd/error.hpp"
#include "fnd/models.hpp"
#include "fnd/ops.hpp"

namespace fnd {

std::vector<std::size_t> choose_mask_positions(const TokenSequence& seq, double mask_rate, Rng& rng) {
  if (!(mask_rate > 0.0 && mask_rate < 1.0)) throw ConfigError("mask_rate must be in (0,1)");
  if (seq.true_length < 3) throw DataError("masking needs at least one content token");
  std::vector<std::size_t> candidates;
  for (std::size_t i = 1; i + 1 < seq.true_length; ++i) candidates.push_back(i);
  const auto n = static_cast<double>(candidates.size());
  const std::size_t count = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(mask_rate * n)));
  // Partial Fisher-Yates: the first `count` slots are a uniform sample.
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(candidates.size() - i));
    std::swap(candidates[i], candidates[j]);
  }
  candidates.resize(count);
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

MlmMasker::MlmMasker(Variant variant, std::uint64_t seed, double mask_rate)
    : variant_(variant), seed_(seed), mask_rate_(mask_rate) {}

std::vector<std::size_t> MlmMasker::positions(const TokenSequence& seq, std::size_t sequence_index,
                                              std::size_t epoch) const {
  std::uint64_t s = mix_seed(seed_, sequence_index);
  if (variant_ == Variant::RobertaStyle) s = mix_seed(s, epoch + 1);
  Rng rng(s);
  return choose_mask_positions(seq, mask_rate_, rng);
}

ad::Node mlm_loss(Model& model, std::span<const TokenSequence> batch,
                  std::span<const std::vector<std::size_t>> positions) {
  if (positions.size() != batch.size()) throw ShapeError("mlm_loss: one position list per sequence");
  std::vector<TokenSequence> masked(batch.begin(), batch.end());
  std::vector<TokenId> rows;
  std::vector<int> targets;
  std::size_t padded = 0;
  for (const auto& seq : batch) padded = std::max(padded, seq.true_length);

  for (std::size_t b = 0; b < batch.size(); ++b) {
    if (positions[b].empty()) throw DataError("mlm_loss: sequence without masked positions");
    for (std::size_t pos : positions[b]) {
      if (pos == 0 || pos + 1 >= batch[b].true_length)
        throw ShapeError("mlm_loss: masked position must be a content token");
      targets.push_back(batch[b].ids[pos]);
      masked[b].ids[pos] = kMaskId;
      rows.push_back(static_cast<TokenId>(b * padded + pos));
    }
  }

  const EncoderOutput enc = transformer_encode(model, masked);
  const ad::Node selected = ad::gather_rows(enc.hidden, rows);
  ad::Node logits = ad::matmul(selected, ad::transpose(model.param("embed.token")));
  logits = ad::add(logits, model.param("mlm.bias"));
  return ad::cross_entropy(logits, targets);
}

ad::Node mlm_pretrain_step(Model& model, std::span<const TokenSequence> batch, double mask_rate, Rng& rng) {
  std::vector<std::vector<std::size_t>> positions;
  positions.reserve(batch.size());
  for (const auto& seq : batch) positions.push_back(choose_mask_positions(seq, mask_rate, rng));
  return mlm_loss(model, batch, positions);
}

}  // namespace fnd
