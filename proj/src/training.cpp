#include "fnd/training.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "fnd/csv.hpp"
#include "fnd/error.hpp"
#include "fnd/ops.hpp"

namespace fnd {

namespace {

std::vector<TokenSequence> gather(const LabeledSet& data, std::span<const std::size_t> idx) {
  std::vector<TokenSequence> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(data.sequences[i]);
  return out;
}

std::size_t count_correct(const Matrix& logits, std::span<const int> labels) {
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const int pred = logits(i, 1) > logits(i, 0) ? 1 : 0;
    if (pred == labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return correct;
}

bool gradients_finite(const ad::ParameterSet& params) {
  for (const auto& [name, node] : params)
    if (!all_finite(node.grad())) return false;
  return true;
}

class ModeGuard {
 public:
  ModeGuard(Model& model, Mode mode) : model_(model), saved_(model.mode()) { model.set_mode(mode); }
  ~ModeGuard() { model_.set_mode(saved_); }
  ModeGuard(const ModeGuard&) = delete;
  ModeGuard& operator=(const ModeGuard&) = delete;

 private:
  Model& model_;
  Mode saved_;
};

}  // namespace

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw ConfigError("learning_rate must be a non-negative number");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
    throw ConfigError("beta1 and beta2 must be in (0,1)");
  if (!(eps_adam > 0.0)) throw ConfigError("eps_adam must be positive");
  if (early_stop_patience && *early_stop_patience == 0)
    throw ConfigError("early_stop_patience must be positive");
}

KeyValues TrainConfig::to_key_values() const {
  KeyValues kv;
  kv.set("train.epochs", std::to_string(epochs));
  kv.set("train.batch_size", std::to_string(batch_size));
  kv.set("train.learning_rate", format_double(learning_rate));
  kv.set("train.beta1", format_double(beta1));
  kv.set("train.beta2", format_double(beta2));
  kv.set("train.eps_adam", format_double(eps_adam));
  kv.set("train.seed", std::to_string(seed));
  kv.set("train.shuffle", shuffle ? "true" : "false");
  kv.set("train.early_stop_patience", early_stop_patience ? std::to_string(*early_stop_patience) : "none");
  return kv;
}

TrainConfig TrainConfig::from_key_values(const KeyValues& kv, const TrainConfig& defaults) {
  TrainConfig c = defaults;
  c.epochs = kv.get_uint("train.epochs", c.epochs);
  c.batch_size = kv.get_uint("train.batch_size", c.batch_size);
  c.learning_rate = kv.get_double("train.learning_rate", c.learning_rate);
  c.beta1 = kv.get_double("train.beta1", c.beta1);
  c.beta2 = kv.get_double("train.beta2", c.beta2);
  c.eps_adam = kv.get_double("train.eps_adam", c.eps_adam);
  c.seed = kv.get_uint("train.seed", c.seed);
  c.shuffle = kv.get_bool("train.shuffle", c.shuffle);
  const std::string patience = kv.get_string("train.early_stop_patience", "");
  if (patience == "none") {
    c.early_stop_patience.reset();
  } else if (!patience.empty()) {
    c.early_stop_patience = kv.get_uint("train.early_stop_patience", 0);
  }
  return c;
}

double default_learning_rate(Arch arch) { return arch == Arch::Transformer ? 3e-4 : 1e-3; }

LabeledSet encode_labeled(const Corpus& corpus, const Vocabulary& vocab, std::size_t max_len) {
  LabeledSet set;
  set.sequences = encode_all(corpus, vocab, max_len);
  set.labels.reserve(corpus.size());
  for (const auto& doc : corpus.documents()) set.labels.push_back(static_cast<int>(doc.label));
  return set;
}

void adam_step(ad::ParameterSet& params, AdamState& state, const TrainConfig& cfg) {
  if (!gradients_finite(params)) throw DivergenceError(-1, -1, "non-finite gradient");
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (auto& [name, node] : params) {
    const Matrix& g = node.grad();
    auto [mit, m_new] = state.m.try_emplace(name, Matrix::Zero(g.rows(), g.cols()));
    auto [vit, v_new] = state.v.try_emplace(name, Matrix::Zero(g.rows(), g.cols()));
    Matrix& m = mit->second;
    Matrix& v = vit->second;
    if (m.rows() != g.rows() || m.cols() != g.cols() || v.rows() != g.rows() || v.cols() != g.cols())
      throw ShapeError("adam_step: optimizer state shape mismatch for " + name);
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    node.mutable_value().array() -=
        cfg.learning_rate * (m.array() / correction1) / ((v.array() / correction2).sqrt() + cfg.eps_adam);
  }
}

LossAccuracy train_epoch(Model& model, const LabeledSet& train, const TrainConfig& cfg, AdamState& state,
                         std::size_t epoch) {
  if (train.empty()) throw DataError("training set is empty");
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  if (cfg.shuffle) {
    Rng rng(mix_seed(cfg.seed, epoch));
    rng.shuffle(order);
  }
  model.set_mode(Mode::Train);
  model.reseed_dropout(mix_seed(mix_seed(cfg.seed, epoch), 0xd50));
  model.params().zero_grad();

  double loss_sum = 0.0;
  std::size_t correct = 0;
  int batch_index = 0;
  for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_index) {
    const std::size_t n = std::min(cfg.batch_size, order.size() - start);
    const std::span<const std::size_t> idx(order.data() + start, n);
    const auto batch = gather(train, idx);
    std::vector<int> labels;
    labels.reserve(n);
    for (std::size_t i : idx) labels.push_back(train.labels[i]);

    const ad::Node logits = forward(model, batch);
    const ad::Node loss = ad::cross_entropy(logits, labels);
    const int ep = static_cast<int>(epoch);
    if (!std::isfinite(loss.item()))
      throw DivergenceError(ep, batch_index,
                            "non-finite loss at epoch " + std::to_string(epoch) + " batch " + std::to_string(batch_index));
    loss_sum += loss.item() * static_cast<double>(n);
    correct += count_correct(logits.value(), labels);

    ad::backward(loss);
    if (!gradients_finite(model.params()))
      throw DivergenceError(ep, batch_index,
                            "non-finite gradient at epoch " + std::to_string(epoch) + " batch " + std::to_string(batch_index));
    adam_step(model.params(), state, cfg);
    model.params().zero_grad();
  }
  const auto total = static_cast<double>(train.size());
  return {loss_sum / total, static_cast<double>(correct) / total};
}

LossAccuracy evaluate_loss(Model& model, const LabeledSet& data, std::size_t batch_size) {
  if (data.empty()) return {};
  ModeGuard guard(model, Mode::Eval);
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, data.size() - start);
    const std::span<const TokenSequence> batch(data.sequences.data() + start, n);
    const std::span<const int> labels(data.labels.data() + start, n);
    const ad::Node logits = forward(model, batch);
    loss_sum += ad::cross_entropy(logits, labels).item() * static_cast<double>(n);
    correct += count_correct(logits.value(), labels);
  }
  const auto total = static_cast<double>(data.size());
  return {loss_sum / total, static_cast<double>(correct) / total};
}

std::vector<int> predict_labels(Model& model, const LabeledSet& data, std::size_t batch_size) {
  ModeGuard guard(model, Mode::Eval);
  std::vector<int> out;
  out.reserve(data.size());
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, data.size() - start);
    const std::span<const TokenSequence> batch(data.sequences.data() + start, n);
    const Matrix logits = forward(model, batch).value();
    for (Eigen::Index i = 0; i < logits.rows(); ++i) out.push_back(logits(i, 1) > logits(i, 0) ? 1 : 0);
  }
  return out;
}

bool EarlyStopping::update(double val_loss) {
  improved_ = !has_best_ || val_loss < best_;
  if (improved_) {
    best_ = val_loss;
    has_best_ = true;
    stale_ = 0;
  } else {
    ++stale_;
  }
  return patience_ && stale_ >= *patience_;
}

FitResult fit(Model& model, const LabeledSet& train, const LabeledSet& val, const TrainConfig& cfg,
              const std::function<void(const EpochMetrics&)>& on_epoch) {
  cfg.validate();
  FitResult result;
  EarlyStopping stopper(cfg.early_stop_patience);
  std::vector<Matrix> best;

  auto snapshot = [&] {
    best.clear();
    for (const auto& [name, node] : model.params()) best.push_back(node.value());
  };

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const LossAccuracy tr = train_epoch(model, train, cfg, result.optimizer, epoch);
    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = tr.loss;
    m.train_accuracy = tr.accuracy;
    bool stop = false;
    if (!val.empty()) {
      const LossAccuracy va = evaluate_loss(model, val, cfg.batch_size);
      if (!std::isfinite(va.loss))
        throw DivergenceError(static_cast<int>(epoch), -1, "non-finite validation loss");
      m.val_loss = va.loss;
      m.val_accuracy = va.accuracy;
      stop = stopper.update(va.loss);
      if (stopper.improved()) {
        snapshot();
        result.best_epoch = epoch;
      }
    } else {
      snapshot();
      result.best_epoch = epoch;
    }
    result.curves.per_epoch.push_back(m);
    if (on_epoch) on_epoch(m);
    if (stop) break;
  }

  std::size_t i = 0;
  for (auto& [name, node] : model.params()) node.mutable_value() = best[i++];
  model.set_mode(Mode::Eval);
  return result;
}

void export_curves(const TrainingCurves& curves, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  char line[256];
  for (const auto& m : curves.per_epoch) {
    std::snprintf(line, sizeof line, "%zu,%.6g,%.6g,%.6g,%.6g\n", m.epoch, m.train_loss, m.train_accuracy,
                  m.val_loss, m.val_accuracy);
    out << line;
  }
}

TrainingCurves load_curves(const std::filesystem::path& path) {
  const auto rows = csv::read_file(path);
  if (rows.empty() || rows[0].size() != 5 || rows[0][0] != "epoch")
    throw DataError(path.string() + ": not a curves file");
  TrainingCurves curves;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != 5) throw DataError(path.string() + ": row " + std::to_string(r) + " has wrong width");
    EpochMetrics m;
    m.epoch = std::stoul(row[0]);
    m.train_loss = std::stod(row[1]);
    m.train_accuracy = std::stod(row[2]);
    m.val_loss = std::stod(row[3]);
    m.val_accuracy = std::stod(row[4]);
    curves.per_epoch.push_back(m);
  }
  return curves;
}

std::vector<double> pretrain_mlm(Model& model, const std::vector<TokenSequence>& data, const MlmConfig& cfg) {
  if (model.config().arch != Arch::Transformer) throw ConfigError("pretraining requires a transformer");
  if (cfg.batch_size == 0 || cfg.steps == 0) throw ConfigError("pretraining needs positive steps and batch size");
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data[i].true_length >= 3) usable.push_back(i);
  if (usable.empty()) throw DataError("no sequence has content tokens to mask");

  const MlmMasker masker(model.config().variant, cfg.seed, cfg.mask_rate);
  TrainConfig adam;
  adam.learning_rate = cfg.learning_rate;
  AdamState state;
  model.set_mode(Mode::Train);
  model.reseed_dropout(mix_seed(cfg.seed, 0x1a));
  model.params().zero_grad();

  std::vector<double> losses;
  losses.reserve(cfg.steps);
  std::vector<std::size_t> order;
  std::size_t cursor = 0, pass = 0;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    std::vector<TokenSequence> batch;
    std::vector<std::vector<std::size_t>> positions;
    while (batch.size() < cfg.batch_size && batch.size() < usable.size()) {
      if (cursor == order.size()) {
        order = usable;
        ++pass;
        Rng rng(mix_seed(cfg.seed, pass));
        rng.shuffle(order);
        cursor = 0;
      }
      const std::size_t i = order[cursor++];
      positions.push_back(masker.positions(data[i], i, pass));
      batch.push_back(data[i]);
    }
    const ad::Node loss = mlm_loss(model, batch, positions);
    if (!std::isfinite(loss.item()))
      throw DivergenceError(static_cast<int>(pass), static_cast<int>(step), "non-finite MLM loss");
    losses.push_back(loss.item());
    ad::backward(loss);
    adam_step(model.params(), state, adam);
    model.params().zero_grad();
  }
  model.set_mode(Mode::Eval);
  return losses;
}

}  // namespace fnd
