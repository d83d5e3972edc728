#include "fnd/error.hpp"
#include "fnd/models.hpp"

namespace fnd {

namespace {

constexpr std::array<std::string_view, 5> kArchNames = {"cnn", "lstm", "bilstm", "cnn-bilstm",
                                                        "transformer"};

}  // namespace

std::string_view arch_name(Arch arch) { return kArchNames[static_cast<std::size_t>(arch)]; }

std::optional<Arch> parse_arch(std::string_view name) {
  for (std::size_t i = 0; i < kArchNames.size(); ++i)
    if (kArchNames[i] == name) return static_cast<Arch>(i);
  return std::nullopt;
}

std::string_view variant_name(Variant variant) {
  return variant == Variant::BertStyle ? "bert" : "roberta";
}

std::optional<Variant> parse_variant(std::string_view name) {
  if (name == "bert") return Variant::BertStyle;
  if (name == "roberta") return Variant::RobertaStyle;
  return std::nullopt;
}

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* what) {
    if (v == 0) throw ConfigError(std::string(what) + " must be positive");
  };
  positive(vocab_size, "vocab_size");
  positive(max_len, "max_len");
  positive(embed_dim, "embed_dim");
  positive(hidden_dim, "hidden_dim");
  positive(num_layers, "num_layers");
  if (vocab_size <= static_cast<std::size_t>(kNumSpecials))
    throw ConfigError("vocab_size must exceed the 5 special tokens");
  if (max_len < 3) throw ConfigError("max_len must be >= 3");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout_rate must be in [0,1)");
  if (num_classes != 2) throw ConfigError("num_classes must be 2");
  if (arch == Arch::Cnn && hidden_dim < kCnnKernelSizes.size())
    throw ConfigError("cnn needs hidden_dim >= 3 (filters are split across 3 kernel sizes)");
  if (arch == Arch::Transformer) {
    positive(num_heads, "num_heads");
    positive(ffn_dim, "ffn_dim");
    if (embed_dim % num_heads != 0) throw ConfigError("embed_dim must be divisible by num_heads");
  }
}

KeyValues ModelConfig::to_key_values() const {
  KeyValues kv;
  kv.set("model.arch", std::string(arch_name(arch)));
  kv.set("model.vocab_size", std::to_string(vocab_size));
  kv.set("model.max_len", std::to_string(max_len));
  kv.set("model.embed_dim", std::to_string(embed_dim));
  kv.set("model.hidden_dim", std::to_string(hidden_dim));
  kv.set("model.num_layers", std::to_string(num_layers));
  kv.set("model.num_heads", std::to_string(num_heads));
  kv.set("model.ffn_dim", std::to_string(ffn_dim));
  kv.set("model.dropout", format_double(dropout_rate));
  kv.set("model.variant", std::string(variant_name(variant)));
  kv.set("model.bidirectional", bidirectional ? "true" : "false");
  kv.set("model.num_classes", std::to_string(num_classes));
  kv.set("model.seed", std::to_string(seed));
  kv.set("model.block_order", "post_ln");
  kv.set("model.tokenizer", "wordpiece");
  return kv;
}

ModelConfig ModelConfig::from_key_values(const KeyValues& kv) {
  ModelConfig c;
  const auto arch_text = kv.get_string("model.arch", std::string(arch_name(c.arch)));
  const auto a = parse_arch(arch_text);
  if (!a) throw ConfigError("unknown arch '" + arch_text + "'");
  c.arch = *a;
  const auto variant_text = kv.get_string("model.variant", std::string(variant_name(c.variant)));
  const auto v = parse_variant(variant_text);
  if (!v) throw ConfigError("unknown variant '" + variant_text + "' (bert|roberta)");
  c.variant = *v;
  c.vocab_size = kv.get_uint("model.vocab_size", c.vocab_size);
  c.max_len = kv.get_uint("model.max_len", c.max_len);
  c.embed_dim = kv.get_uint("model.embed_dim", c.embed_dim);
  c.hidden_dim = kv.get_uint("model.hidden_dim", c.hidden_dim);
  c.num_layers = kv.get_uint("model.num_layers", c.num_layers);
  c.num_heads = kv.get_uint("model.num_heads", c.num_heads);
  c.ffn_dim = kv.get_uint("model.ffn_dim", c.ffn_dim);
  c.dropout_rate = kv.get_double("model.dropout", c.dropout_rate);
  c.bidirectional = kv.get_bool("model.bidirectional", c.bidirectional);
  c.num_classes = kv.get_uint("model.num_classes", c.num_classes);
  c.seed = kv.get_uint("model.seed", c.seed);
  if (kv.get_string("model.block_order", "post_ln") != "post_ln")
    throw ConfigError("only model.block_order=post_ln is implemented");
  if (kv.get_string("model.tokenizer", "wordpiece") != "wordpiece")
    throw ConfigError("only model.tokenizer=wordpiece is implemented");
  return c;
}

}  // namespace fnd
