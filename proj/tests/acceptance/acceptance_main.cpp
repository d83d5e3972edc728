// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion names
// (AC1 ... AC9) as arguments to run a subset.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../support/temp_dir.hpp"
#include "../support/tiny_models.hpp"
#include "fnd/commands.hpp"
#include "fnd/corpus.hpp"
#include "fnd/csv.hpp"
#include "fnd/evaluation.hpp"
#include "fnd/models.hpp"
#include "fnd/run_config.hpp"
#include "fnd/synth.hpp"
#include "fnd/tokenizer.hpp"
#include "fnd/training.hpp"

namespace fnd {
namespace {

namespace fs = std::filesystem;

// Pinned tolerances and budgets.
constexpr double kGradTolerance = 1e-4;
constexpr int kGradSeeds = 5;
constexpr double kGradBudgetSeconds = 120;

constexpr int kMetricTrials = 20;
constexpr int kMetricPairs = 1000;
constexpr double kMetricBudgetSeconds = 5;

constexpr double kTableTolerance = 0.015;

constexpr std::size_t kOverfitDocs = 32;
constexpr std::size_t kOverfitMaxEpochs = 300;
constexpr std::size_t kGeneralizeDocs = 400;
constexpr std::size_t kHeldoutDocs = 200;
constexpr std::size_t kTransformerMaxEpochs = 30;
constexpr double kTransformerValTarget = 0.95;
constexpr double kOverfitBudgetSeconds = 300;

constexpr double kBenchValTarget = 0.85;
constexpr double kBenchBudgetSeconds = 20 * 60;

constexpr std::size_t kMlmEvalDocs = 256;
constexpr double kMlmInitialBand = 0.20;
constexpr double kMlmTargetRatio = 0.5;
constexpr double kMlmBudgetSeconds = 180;

constexpr double kSoftmaxTolerance = 1e-6;
constexpr int kPadTrials = 10;

constexpr int kStatsCorpora = 50;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  std::string id;
  std::string title;
  std::function<Outcome()> run;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int run(const std::vector<std::string>& args, std::string* out_text = nullptr) {
  std::istringstream in;
  std::ostringstream out, err;
  const int code = run_cli(args, in, out, err);
  if (out_text) *out_text = out.str();
  if (code != kExitOk) std::cerr << err.str();
  return code;
}

// AC1 --------------------------------------------------------------------

Outcome gradient_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  std::string worst;
  double worst_err = 0.0;
  for (Arch arch : kAllArchs) {
    double arch_max = 0.0;
    for (int s = 1; s <= kGradSeeds; ++s) {
      const auto r = testing::tiny_grad_check(arch, static_cast<std::uint64_t>(s));
      arch_max = std::max(arch_max, r.max_relative_error);
      if (!(r.max_relative_error < kGradTolerance)) o.pass = false;
    }
    if (arch_max >= worst_err) {
      worst_err = arch_max;
      worst = std::string(arch_name(arch));
    }
  }
  const double t = seconds_since(t0);
  if (t >= kGradBudgetSeconds) o.pass = false;
  o.detail = "worst max rel err " + fmt("%.2e", worst_err) + " (" + worst + "), tol " + fmt("%.0e", kGradTolerance) +
             ", " + fmt("%.1f", t) + " s";
  return o;
}

// AC2 --------------------------------------------------------------------

struct OracleRow {
  double precision, recall, f1;
  std::size_t support;
};

// Counts directly from the label pairs, class by class.
OracleRow oracle_metrics(const std::vector<Label>& preds, const std::vector<Label>& golds, Label positive) {
  std::size_t hit = 0, predicted = 0, actual = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] == positive, g = golds[i] == positive;
    hit += p && g;
    predicted += p;
    actual += g;
  }
  OracleRow r{};
  r.precision = predicted ? static_cast<double>(hit) / static_cast<double>(predicted) : 0.0;
  r.recall = actual ? static_cast<double>(hit) / static_cast<double>(actual) : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  r.support = actual;
  return r;
}

Outcome metrics_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(20240601);
  int mismatches = 0;
  for (int trial = 0; trial < kMetricTrials; ++trial) {
    // Skewed rates so that some trials are heavily imbalanced.
    const double pred_rate = rng.uniform(), gold_rate = rng.uniform();
    std::vector<Label> preds(kMetricPairs), golds(kMetricPairs);
    for (int i = 0; i < kMetricPairs; ++i) {
      preds[i] = rng.bernoulli(pred_rate) ? Label::Fake : Label::Real;
      golds[i] = rng.bernoulli(gold_rate) ? Label::Fake : Label::Real;
    }
    const ConfusionMatrix cm = confusion(preds, golds);
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (int i = 0; i < kMetricPairs; ++i) {
      const bool p = preds[i] == Label::Fake, g = golds[i] == Label::Fake;
      tp += p && g;
      fp += p && !g;
      tn += !p && !g;
      fn += !p && g;
    }
    if (cm.tp != tp || cm.fp != fp || cm.tn != tn || cm.fn != fn) ++mismatches;

    const ClassReport rep = report(cm);
    std::size_t correct = 0;
    for (int i = 0; i < kMetricPairs; ++i) correct += preds[i] == golds[i];
    if (rep.accuracy != static_cast<double>(correct) / kMetricPairs) ++mismatches;
    double f1_sum = 0.0;
    for (const auto& m : rep.per_class) {
      const OracleRow r = oracle_metrics(preds, golds, m.label);
      if (m.precision != r.precision || m.recall != r.recall || m.f1 != r.f1 || m.support != r.support) ++mismatches;
      f1_sum += r.f1;
    }
    if (rep.macro_f1 != f1_sum / 2.0) ++mismatches;
  }
  const double t = seconds_since(t0);
  Outcome o;
  o.pass = mismatches == 0 && t < kMetricBudgetSeconds;
  o.detail = std::to_string(kMetricTrials) + "x" + std::to_string(kMetricPairs) + " pairs, " +
             std::to_string(mismatches) + " mismatches (exact), " + fmt("%.2f", t) + " s";
  return o;
}

// AC3 --------------------------------------------------------------------

Outcome table_consistency() {
  struct Row {
    double p, r, f1;
  };
  const Row rows[] = {{0.93, 0.78, 0.85}, {0.81, 0.94, 0.87}, {1.00, 0.97, 0.99}, {0.92, 0.99, 0.96}};
  Outcome o;
  double worst = 0.0;
  for (const auto& row : rows) {
    const double gap = std::abs(f1_score(row.p, row.r) - row.f1);
    worst = std::max(worst, gap);
    if (!(gap <= kTableTolerance)) o.pass = false;
  }
  o.detail = "max |F1(P,R) - reported| = " + fmt("%.4f", worst) + ", tol " + fmt("%.3f", kTableTolerance);
  return o;
}

// AC4 --------------------------------------------------------------------

SynthConfig separable_config(std::size_t docs) {
  SynthConfig sc;
  sc.num_docs = docs;
  sc.keyword_strength = 1.0;
  sc.seed = 11;
  return sc;
}

Vocabulary default_vocab(const Corpus& corpus) {
  const RunConfig defaults;
  return build_vocab(corpus, defaults.vocab_max_size, defaults.vocab_min_freq);
}

Model default_model(Arch arch, const Vocabulary& vocab) {
  ModelConfig mc;
  mc.arch = arch;
  mc.vocab_size = vocab.size();
  return Model(mc);
}

TrainConfig default_train(Arch arch) {
  TrainConfig tc;
  tc.learning_rate = default_learning_rate(arch);
  return tc;
}

// First epoch (1-based) at which Eval-mode train accuracy is 1.0, or 0.
std::size_t epochs_to_fit(Arch arch) {
  const Corpus corpus = synth_corpus(separable_config(kOverfitDocs));
  const Vocabulary vocab = default_vocab(corpus);
  Model model = default_model(arch, vocab);
  const LabeledSet train = encode_labeled(corpus, vocab, model.config().max_len);
  const TrainConfig tc = default_train(arch);
  AdamState state;
  for (std::size_t epoch = 1; epoch <= kOverfitMaxEpochs; ++epoch) {
    train_epoch(model, train, tc, state, epoch);
    if (evaluate_loss(model, train, tc.batch_size).accuracy == 1.0) return epoch;
  }
  return 0;
}

// Transformer trained on a larger separable corpus, scored each epoch on
// held-out documents from an independent stream of the same generator.
std::pair<std::size_t, double> transformer_generalization() {
  const SynthConfig sc = separable_config(kGeneralizeDocs);
  const Corpus corpus = synth_corpus(sc);
  const Vocabulary vocab = default_vocab(corpus);
  Model model = default_model(Arch::Transformer, vocab);
  const LabeledSet train = encode_labeled(corpus, vocab, model.config().max_len);
  const LabeledSet heldout = encode_labeled(synth_heldout(sc, kHeldoutDocs, 1), vocab, model.config().max_len);
  const TrainConfig tc = default_train(Arch::Transformer);
  AdamState state;
  double best = 0.0;
  for (std::size_t epoch = 1; epoch <= kTransformerMaxEpochs; ++epoch) {
    train_epoch(model, train, tc, state, epoch);
    const double va = evaluate_loss(model, heldout, tc.batch_size).accuracy;
    best = std::max(best, va);
    if (va >= kTransformerValTarget) return {epoch, va};
  }
  return {0, best};
}

Outcome overfit_sanity() {
  Outcome o;
  std::string detail;
  for (Arch arch : kAllArchs) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t fit_epoch = epochs_to_fit(arch);
    const double t = seconds_since(t0);
    if (!fit_epoch || t >= kOverfitBudgetSeconds) o.pass = false;
    detail += std::string(arch_name(arch)) + " fit@" + (fit_epoch ? std::to_string(fit_epoch) : "never") + " " +
              fmt("%.0f", t) + "s; ";
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto [val_epoch, val] = transformer_generalization();
  const double t = seconds_since(t0);
  if (!val_epoch || t >= kOverfitBudgetSeconds) o.pass = false;
  o.detail = detail + "transformer held-out " + fmt("%.3f", val) + "@" +
             (val_epoch ? std::to_string(val_epoch) : "never") + " " + fmt("%.0f", t) + "s";
  return o;
}

// AC5 --------------------------------------------------------------------

Outcome end_to_end_bench() {
  testing::TempDir dir;
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path data = dir / "synthetic.csv";
  Outcome o;
  if (run({"synth", "--out", data.string()}) != kExitOk ||
      run({"bench", "--data", data.string(), "--out", (dir / "bench").string()}) != kExitOk)
    return {false, "command failed"};
  const double t = seconds_since(t0);
  const auto rows = csv::read_file(dir / "bench" / "leaderboard.csv");
  std::string detail;
  std::size_t archs = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ++archs;
    const std::string& acc = rows[i][1];
    const bool ok = acc != "diverged" && std::stod(acc) >= kBenchValTarget;
    if (!ok) o.pass = false;
    detail += rows[i][0] + " " + acc + "; ";
  }
  if (archs != kAllArchs.size() || t >= kBenchBudgetSeconds) o.pass = false;
  o.detail = detail + "target " + fmt("%.2f", kBenchValTarget) + ", " + fmt("%.0f", t) + " s";
  return o;
}

// AC6 --------------------------------------------------------------------

Outcome pretraining_signal() {
  const SynthConfig sc;
  const Corpus corpus = synth_corpus(sc);
  const RunConfig defaults;
  const Vocabulary vocab = build_vocab(corpus, defaults.vocab_max_size, defaults.vocab_min_freq);
  ModelConfig mc;
  mc.arch = Arch::Transformer;
  mc.vocab_size = vocab.size();
  Model model(mc);
  const auto data = encode_all(corpus, vocab, mc.max_len);

  // The loss before and after is measured on one fixed masked held-out batch
  // in Eval mode, so both numbers see the same positions and no dropout.
  const auto probe = encode_all(synth_heldout(sc, kMlmEvalDocs, 2), vocab, mc.max_len);
  Rng rng(99);
  std::vector<std::vector<std::size_t>> positions;
  for (const auto& s : probe) positions.push_back(choose_mask_positions(s, MlmConfig{}.mask_rate, rng));
  auto probe_loss = [&] {
    model.set_mode(Mode::Eval);
    return mlm_loss(model, probe, positions).item();
  };

  const double ln_v = std::log(static_cast<double>(vocab.size()));
  const double before = probe_loss();
  const auto t0 = std::chrono::steady_clock::now();
  const MlmConfig cfg;
  pretrain_mlm(model, data, cfg);
  const double t = seconds_since(t0);
  const double after = probe_loss();

  Outcome o;
  const bool initial_ok = std::abs(before - ln_v) <= kMlmInitialBand * ln_v;
  o.pass = initial_ok && after < kMlmTargetRatio * before && t < kMlmBudgetSeconds;
  o.detail = std::to_string(cfg.steps) + " steps: loss " + fmt("%.3f", before) + " -> " + fmt("%.3f", after) +
             " (ratio " + fmt("%.3f", after / before) + ", target < " + fmt("%.2f", kMlmTargetRatio) + "), ln V " +
             fmt("%.3f", ln_v) + ", " + fmt("%.0f", t) + " s";
  return o;
}

// AC7 --------------------------------------------------------------------

Outcome determinism() {
  testing::TempDir dir;
  const fs::path data = dir / "synthetic.csv";
  Outcome o;
  if (run({"synth", "--out", data.string(), "--docs", "300"}) != kExitOk) return {false, "synth failed"};
  for (const char* name : {"a", "b"}) {
    if (run({"train", "--data", data.string(), "--arch", "transformer", "--seed", "1", "--epochs", "2", "--out",
             (dir / name).string()}) != kExitOk)
      return {false, "train failed"};
  }
  const bool curves_same = testing::read_file(dir / "a" / "curves.csv") == testing::read_file(dir / "b" / "curves.csv");
  const bool model_same = testing::read_file(dir / "a" / "model.bin") == testing::read_file(dir / "b" / "model.bin");

  // Checkpoint round trip per architecture after a short training run.
  const Corpus corpus = load_corpus(data, CorpusFormat::Csv);
  const Vocabulary vocab = build_vocab(corpus, 30000, 1);
  const LabeledSet set = encode_labeled(corpus, vocab, 64);
  std::size_t round_trips = 0;
  for (Arch arch : kAllArchs) {
    ModelConfig mc;
    mc.arch = arch;
    mc.vocab_size = vocab.size();
    mc.max_len = 64;
    Model model(mc);
    TrainConfig tc;
    tc.epochs = 1;
    tc.learning_rate = default_learning_rate(arch);
    fit(model, set, {}, tc);
    const fs::path path = dir / (std::string(arch_name(arch)) + ".bin");
    save_checkpoint(model, nullptr, vocab.content_hash(), path);
    Model loaded = load_checkpoint(path).to_model();
    const std::span<const TokenSequence> batch(set.sequences.data(), 16);
    model.set_mode(Mode::Eval);
    const Matrix a = forward(model, batch).value(), b = forward(loaded, batch).value();
    round_trips += a.rows() == b.rows() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
  }
  o.pass = curves_same && model_same && round_trips == kAllArchs.size();
  o.detail = std::string("curves.csv ") + (curves_same ? "identical" : "DIFFER") + ", model.bin " +
             (model_same ? "identical" : "DIFFER") + ", checkpoint forward bit-identical " +
             std::to_string(round_trips) + "/" + std::to_string(kAllArchs.size());
  return o;
}

// AC8 --------------------------------------------------------------------

Outcome normalization_invariants() {
  Rng rng(8080);
  double worst_sum = 0.0;
  double worst_masked = 0.0;

  for (int trial = 0; trial < 200; ++trial) {
    const auto rows = static_cast<Eigen::Index>(1 + rng.below(12));
    const auto cols = static_cast<Eigen::Index>(1 + rng.below(40));
    const double scale = std::pow(10.0, rng.uniform(-3.0, 3.0));
    Matrix x(rows, cols);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal(0.0, scale);
    const Matrix p = softmax_rows(x);
    for (Eigen::Index r = 0; r < rows; ++r) worst_sum = std::max(worst_sum, std::abs(p.row(r).sum() - 1.0));
  }

  // Attention rows of a default-width transformer on padded random batches.
  ModelConfig tc;
  tc.arch = Arch::Transformer;
  tc.vocab_size = 60;
  tc.max_len = 24;
  for (int trial = 0; trial < 10; ++trial) {
    tc.seed = static_cast<std::uint64_t>(trial + 1);
    Model model(tc);
    model.set_mode(Mode::Eval);
    auto batch = testing::random_batch(rng, 4, tc.max_len, tc.vocab_size);
    AttentionTrace trace;
    forward_transformer(model, batch, &trace);
    for (const auto& layer : trace.probs)
      for (std::size_t b = 0; b < layer.size(); ++b)
        for (const auto& head : layer[b])
          for (Eigen::Index r = 0; r < head.rows(); ++r) {
            worst_sum = std::max(worst_sum, std::abs(head.row(r).sum() - 1.0));
            for (auto c = static_cast<Eigen::Index>(batch[b].true_length); c < head.cols(); ++c)
              worst_masked = std::max(worst_masked, std::abs(head(r, c)));
          }
  }

  // Replacing PAD ids by arbitrary tokens must leave the logits untouched.
  std::size_t changed = 0;
  for (Arch arch : kAllArchs) {
    ModelConfig mc;
    mc.arch = arch;
    mc.vocab_size = 60;
    mc.max_len = 24;
    for (int trial = 0; trial < kPadTrials; ++trial) {
      mc.seed = static_cast<std::uint64_t>(100 + trial);
      Model model(mc);
      model.set_mode(Mode::Eval);
      auto batch = testing::random_batch(rng, 3, mc.max_len, mc.vocab_size);
      // Keep one full-length sequence so the others are padded inside the batch.
      batch[0].true_length = mc.max_len;
      batch[0].ids.back() = kSepId;
      std::fill(batch[0].mask.begin(), batch[0].mask.end(), 1);
      for (std::size_t i = 1; i + 1 < mc.max_len; ++i)
        batch[0].ids[i] = static_cast<TokenId>(kNumSpecials + rng.below(mc.vocab_size - kNumSpecials));
      const Matrix base = forward(model, batch).value();
      auto noisy = batch;
      for (auto& s : noisy)
        for (std::size_t i = s.true_length; i < s.ids.size(); ++i)
          s.ids[i] = static_cast<TokenId>(rng.below(mc.vocab_size));
      const Matrix other = forward(model, noisy).value();
      changed += !(base.array() == other.array()).all();
    }
  }

  Outcome o;
  o.pass = worst_sum <= kSoftmaxTolerance && worst_masked == 0.0 && changed == 0;
  o.detail = "max |row sum - 1| " + fmt("%.1e", worst_sum) + " (tol " + fmt("%.0e", kSoftmaxTolerance) +
             "), max masked attention " + fmt("%.1e", worst_masked) + ", PAD perturbations changing logits " +
             std::to_string(changed) + "/" + std::to_string(kPadTrials * kAllArchs.size());
  return o;
}

// AC9 --------------------------------------------------------------------

std::vector<std::string> oracle_words(const std::string& text) {
  std::vector<std::string> words;
  std::istringstream ss(text);
  for (std::string w; ss >> w;) words.push_back(w);
  return words;
}

std::string oracle_term(std::string w) {
  auto punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
  while (!w.empty() && punct(w.front())) w.erase(w.begin());
  while (!w.empty() && punct(w.back())) w.pop_back();
  for (char& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return w;
}

Corpus random_corpus(Rng& rng) {
  static const std::vector<std::string> pool = {"The",  "the",   "news", "News!", "fake", "(real)", "a",   "and",
                                                "vote", "vote,", "...",  "covid", "is",   "'quote'", "--", "Of"};
  static const char* gaps[] = {" ", "  ", "\t", "\n", " \n "};
  std::vector<Document> docs;
  const std::size_t n = 1 + rng.below(60);
  for (std::size_t d = 0; d < n; ++d) {
    std::string text;
    const std::size_t len = 1 + rng.below(90);
    for (std::size_t w = 0; w < len; ++w) {
      if (w) text += gaps[rng.below(5)];
      text += pool[rng.below(pool.size())];
    }
    docs.push_back({"d" + std::to_string(d), text, rng.bernoulli(0.4) ? Label::Fake : Label::Real, std::nullopt});
  }
  return Corpus(std::move(docs));
}

Outcome stats_correctness() {
  Rng rng(9090);
  std::size_t checks = 0, mismatches = 0;
  for (int c = 0; c < kStatsCorpora; ++c) {
    const Corpus corpus = random_corpus(rng);

    const std::size_t width = 1 + rng.below(15);
    std::vector<std::size_t> counts;
    for (const auto& d : corpus.documents()) counts.push_back(oracle_words(d.text).size());
    const std::size_t lo = *std::min_element(counts.begin(), counts.end()) / width;
    const std::size_t hi = *std::max_element(counts.begin(), counts.end()) / width;
    std::vector<std::size_t> edges, bins(hi - lo + 1, 0);
    for (std::size_t k = lo; k <= hi + 1; ++k) edges.push_back(k * width);
    for (std::size_t n : counts) ++bins[n / width - lo];
    const Histogram h = word_count_histogram(corpus, width);
    ++checks;
    mismatches += h.bin_edges != edges || h.bin_counts != bins;

    const std::size_t top_k = 1 + rng.below(20);
    for (FreqScope scope : {FreqScope::All, FreqScope::FakeOnly, FreqScope::RealOnly}) {
      std::map<std::string, std::size_t> tally;
      for (const auto& d : corpus.documents()) {
        if (scope == FreqScope::FakeOnly && d.label != Label::Fake) continue;
        if (scope == FreqScope::RealOnly && d.label != Label::Real) continue;
        for (const auto& w : oracle_words(d.text)) {
          const std::string t = oracle_term(w);
          if (!t.empty() && !default_stopwords().contains(t)) ++tally[t];
        }
      }
      std::vector<std::pair<std::string, std::size_t>> expected(tally.begin(), tally.end());
      std::stable_sort(expected.begin(), expected.end(),
                       [](const auto& a, const auto& b) { return a.second > b.second; });
      if (expected.size() > top_k) expected.resize(top_k);
      ++checks;
      mismatches += term_frequencies(corpus, scope, default_stopwords(), top_k).entries != expected;
    }
  }

  // The same oracle against the files written by the stats command.
  testing::TempDir dir;
  const Corpus corpus = random_corpus(rng);
  save_corpus_csv(corpus, dir / "random.csv");
  std::string summary;
  if (run({"stats", "--data", (dir / "random.csv").string(), "--out", (dir / "stats").string(), "--bin-width", "10"},
          &summary) != kExitOk)
    return {false, "stats command failed"};
  std::map<std::size_t, std::size_t> per_bin;
  for (const auto& d : corpus.documents()) ++per_bin[oracle_words(d.text).size() / 10];
  const auto rows = csv::read_file(dir / "stats" / "histogram.csv");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ++checks;
    const std::size_t bin = std::stoul(rows[i][0]) / 10;
    mismatches += std::stoul(rows[i][2]) != (per_bin.contains(bin) ? per_bin[bin] : 0);
  }

  Outcome o;
  o.pass = mismatches == 0;
  o.detail = std::to_string(checks) + " oracle comparisons, " + std::to_string(mismatches) + " mismatches";
  if (const char* kaggle = std::getenv("FND_KAGGLE_CSV")) {
    if (run({"stats", "--data", kaggle, "--out", (dir / "kaggle").string()}, &summary) == kExitOk) {
      std::string line = summary.substr(0, summary.find('\n'));
      o.detail += "; supplied dataset: " + line + " (report only)";
    }
  }
  return o;
}

}  // namespace
}  // namespace fnd

int main(int argc, char** argv) {
  using fnd::Criterion;
  const std::vector<Criterion> criteria = {
      {"AC1", "gradient correctness", fnd::gradient_correctness},
      {"AC2", "metrics oracle", fnd::metrics_oracle},
      {"AC3", "classification-report F1 consistency", fnd::table_consistency},
      {"AC4", "overfit sanity", fnd::overfit_sanity},
      {"AC5", "end-to-end bench", fnd::end_to_end_bench},
      {"AC6", "pretraining signal", fnd::pretraining_signal},
      {"AC7", "determinism", fnd::determinism},
      {"AC8", "normalization invariants", fnd::normalization_invariants},
      {"AC9", "stats correctness", fnd::stats_correctness},
  };
  const std::set<std::string> selected(argv + 1, argv + argc);

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    fnd::Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << c.id << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << c.title << ": " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
