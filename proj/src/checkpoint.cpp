#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fnd/error.hpp"
#include "fnd/training.hpp"

namespace fnd {

namespace {

constexpr char kMagic[8] = {'F', 'N', 'D', 'C', 'K', 'P', 'T', '1'};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(std::string_view s) { out_.write(s.data(), static_cast<std::streamsize>(s.size())); }
  void matrix(const Matrix& m) {
    u32(static_cast<std::uint32_t>(m.rows()));
    u32(static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.size(); ++i) f64(m.data()[i]);
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::string data, std::string source) : data_(std::move(data)), source_(std::move(source)) {}

  std::string_view bytes(std::size_t n) {
    if (pos_ + n > data_.size()) throw DataError(source_ + ": truncated checkpoint");
    std::string_view out(data_.data() + pos_, n);
    pos_ += n;
    return out;
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(bytes(1)[0]); }
  std::uint32_t u32() {
    const auto b = bytes(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(b[static_cast<std::size_t>(i)]);
    return v;
  }
  std::uint64_t u64() {
    const auto b = bytes(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(b[static_cast<std::size_t>(i)]);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  Matrix matrix() {
    const auto rows = u32();
    const auto cols = u32();
    if (static_cast<std::uint64_t>(rows) * cols * 8 > data_.size() - pos_)
      throw DataError(source_ + ": truncated checkpoint");
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = f64();
    return m;
  }
  bool at_end() const { return pos_ == data_.size(); }

 private:
  std::string data_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace

Model Checkpoint::to_model() const {
  Model model(config);
  for (auto& [name, node] : model.params()) {
    const auto it = parameters.find(name);
    if (it == parameters.end()) throw DataError("checkpoint is missing parameter " + name);
    if (it->second.rows() != node.rows() || it->second.cols() != node.cols())
      throw DataError("checkpoint parameter " + name + " has the wrong shape");
    node.mutable_value() = it->second;
  }
  if (parameters.size() != model.params().size())
    throw DataError("checkpoint has parameters the configuration does not define");
  model.set_mode(Mode::Eval);
  return model;
}

void save_checkpoint(const Model& model, const AdamState* state, std::uint64_t vocab_hash,
                     const std::filesystem::path& path) {
  std::ostringstream buf(std::ios::binary);
  Writer w(buf);
  w.bytes(std::string_view(kMagic, sizeof kMagic));
  w.u32(kCheckpointVersion);
  const std::string config = model.config().to_key_values().to_text();
  w.u64(config.size());
  w.bytes(config);
  w.u64(vocab_hash);
  w.u32(static_cast<std::uint32_t>(model.params().size()));
  for (const auto& [name, node] : model.params()) {
    w.u32(static_cast<std::uint32_t>(name.size()));
    w.bytes(name);
    w.matrix(node.value());
  }
  w.u8(state ? 1 : 0);
  if (state) {
    w.u64(state->t);
    for (const auto* moments : {&state->m, &state->v})
      for (const auto& [name, node] : model.params()) {
        const auto it = moments->find(name);
        w.matrix(it != moments->end() ? it->second : Matrix::Zero(node.rows(), node.cols()));
      }
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  const std::string bytes = buf.str();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  Reader r(buf.str(), path.string());

  if (r.bytes(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic))
    throw DataError(path.string() + ": not a checkpoint (bad magic)");
  const auto version = r.u32();
  if (version != kCheckpointVersion)
    throw DataError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  const auto config_len = r.u64();
  Checkpoint ck;
  ck.config = ModelConfig::from_key_values(KeyValues::parse(r.bytes(config_len)));
  ck.vocab_hash = r.u64();
  const auto count = r.u32();
  std::vector<std::string> order;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name(r.bytes(r.u32()));
    ck.parameters[name] = r.matrix();
    order.push_back(std::move(name));
  }
  if (r.u8()) {
    AdamState state;
    state.t = r.u64();
    for (auto* moments : {&state.m, &state.v})
      for (const auto& name : order) (*moments)[name] = r.matrix();
    ck.optimizer = std::move(state);
  }
  if (!r.at_end()) throw DataError(path.string() + ": trailing bytes after checkpoint");
  return ck;
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected) {
  Checkpoint ck = load_checkpoint(path);
  if (!(ck.config == expected))
    throw ConfigError(path.string() + ": checkpoint configuration does not match the requested model");
  return ck;
}

}  // namespace fnd
