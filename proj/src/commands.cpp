#include "fnd/commands.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "fnd/corpus.hpp"
#include "fnd/csv.hpp"
#include "fnd/error.hpp"
#include "fnd/evaluation.hpp"
#include "fnd/run_config.hpp"
#include "fnd/synth.hpp"
#include "fnd/tokenizer.hpp"
#include "fnd/training.hpp"

namespace fnd {

namespace fs = std::filesystem;

namespace {

struct DataOptions {
  std::string path;
  std::string format;
};

struct TrainOptions {
  DataOptions data;
  std::string arch;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::string vocab;
  std::vector<std::string> sets;
  std::string out;
};

CorpusFormat format_of(const std::string& name) {
  if (name.empty()) return CorpusFormat::Csv;
  const auto f = parse_corpus_format(name);
  if (!f) throw ConfigError("unknown --format '" + name + "' (csv|dirs)");
  return *f;
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
}

RunConfig resolve_run(const TrainOptions& o) {
  KeyValues file;
  if (!o.config.empty()) file = KeyValues::load(o.config);
  KeyValues cli;
  for (const auto& s : o.sets) cli.assign(s);
  if (!o.data.path.empty()) cli.set("data.path", o.data.path);
  if (!o.data.format.empty()) cli.set("data.format", o.data.format);
  if (!o.arch.empty()) {
    if (!parse_arch(o.arch)) throw ConfigError("unknown --arch '" + o.arch + "'");
    cli.set("model.arch", o.arch);
  }
  if (o.seed) {
    cli.set("model.seed", std::to_string(*o.seed));
    cli.set("train.seed", std::to_string(*o.seed));
  }
  if (o.epochs) cli.set("train.epochs", std::to_string(*o.epochs));
  RunConfig rc = RunConfig::resolve(file, cli);
  rc.validate();
  if (rc.data.empty()) throw ConfigError("no dataset given (--data or data.path)");
  return rc;
}

// Everything a run needs before training starts.
struct Prepared {
  CorpusSplit parts;
  Vocabulary vocab;
  LabeledSet train;
  LabeledSet val;
};

Prepared prepare(RunConfig& rc, const std::string& vocab_path) {
  const Corpus corpus = load_corpus(rc.data, rc.format);
  Prepared p{split(corpus, rc.split), Vocabulary(), {}, {}};
  p.vocab = vocab_path.empty() ? build_vocab(p.parts.train, rc.vocab_max_size, rc.vocab_min_freq)
                               : Vocabulary::load(vocab_path);
  rc.model.vocab_size = p.vocab.size();
  p.train = encode_labeled(p.parts.train, p.vocab, rc.model.max_len);
  p.val = encode_labeled(p.parts.val, p.vocab, rc.model.max_len);
  return p;
}

std::vector<Label> to_labels(const std::vector<int>& v) {
  std::vector<Label> out;
  out.reserve(v.size());
  for (int x : v) out.push_back(static_cast<Label>(x));
  return out;
}

int cmd_stats(const DataOptions& data, const std::string& out_dir, std::size_t bin_width, std::size_t top_k,
              const std::string& stopword_file, std::ostream& out) {
  const Corpus corpus = load_corpus(data.path, format_of(data.format));
  const fs::path dir(out_dir);
  ensure_dir(dir);
  const auto& stopwords = stopword_file.empty() ? default_stopwords() : load_stopwords(stopword_file);

  const Histogram h = word_count_histogram(corpus, bin_width);
  {
    std::ofstream f(dir / "histogram.csv", std::ios::binary);
    f << "bin_start,bin_end,count\n";
    for (std::size_t i = 0; i < h.bin_counts.size(); ++i)
      f << h.bin_edges[i] << ',' << h.bin_edges[i + 1] << ',' << h.bin_counts[i] << '\n';
  }
  const std::pair<FreqScope, const char*> scopes[] = {
      {FreqScope::All, "freq_all.csv"}, {FreqScope::FakeOnly, "freq_fake.csv"}, {FreqScope::RealOnly, "freq_real.csv"}};
  for (const auto& [scope, name] : scopes) {
    std::ofstream f(dir / name, std::ios::binary);
    f << "term,count\n";
    for (const auto& [term, count] : term_frequencies(corpus, scope, stopwords, top_k).entries)
      f << csv::escape(term) << ',' << count << '\n';
  }
  const ClassCounts balance = class_balance(corpus);
  {
    std::ofstream f(dir / "class_balance.csv", std::ios::binary);
    f << "label,count\n";
    for (Label l : {Label::Real, Label::Fake}) f << label_name(l) << ',' << balance.at(l) << '\n';
  }
  out << "documents=" << corpus.size() << " fake=" << balance.at(Label::Fake) << " real=" << balance.at(Label::Real)
      << " median_words=" << median_word_count(corpus) << '\n';
  return kExitOk;
}

int cmd_train(TrainOptions o, std::ostream& out) {
  RunConfig rc = resolve_run(o);
  const fs::path dir(o.out);
  ensure_dir(dir);
  Prepared p = prepare(rc, o.vocab);

  rc.to_key_values().save(dir / "run_config.txt");
  p.vocab.save(dir / "vocab.txt");
  save_corpus_csv(p.parts.train, dir / "train.csv");
  save_corpus_csv(p.parts.val, dir / "val.csv");
  if (!p.parts.test.empty()) save_corpus_csv(p.parts.test, dir / "test.csv");

  Model model(rc.model);
  const FitResult result = fit(model, p.train, p.val, rc.train, [&](const EpochMetrics& m) {
    out << "epoch " << m.epoch << " train_loss=" << fixed4(m.train_loss) << " train_acc=" << fixed4(m.train_accuracy)
        << " val_loss=" << fixed4(m.val_loss) << " val_acc=" << fixed4(m.val_accuracy) << '\n';
  });
  export_curves(result.curves, dir / "curves.csv");
  save_checkpoint(model, &result.optimizer, p.vocab.content_hash(), dir / "model.bin");
  out << "best_epoch=" << result.best_epoch << " checkpoint=" << (dir / "model.bin").string() << '\n';
  return kExitOk;
}

int cmd_evaluate(const std::string& model_path, const std::string& vocab_path, const DataOptions& data,
                 const std::string& out_dir, std::ostream& out) {
  const Checkpoint ck = load_checkpoint(model_path);
  const Vocabulary vocab = Vocabulary::load(vocab_path);
  if (vocab.content_hash() != ck.vocab_hash)
    throw ConfigError("vocabulary " + vocab_path + " does not match the checkpoint's vocabulary");
  Model model = ck.to_model();
  const Corpus corpus = load_corpus(data.path, format_of(data.format));
  const LabeledSet set = encode_labeled(corpus, vocab, model.config().max_len);

  const auto preds = to_labels(predict_labels(model, set, 32));
  const auto golds = to_labels(set.labels);
  const ConfusionMatrix cm = confusion(preds, golds);
  const ClassReport r = report(cm);
  const fs::path dir(out_dir);
  ensure_dir(dir);
  export_report(r, cm, dir / "report.csv", dir / "confusion.csv");
  print_report(out, r);
  return kExitOk;
}

int cmd_predict(const std::string& model_path, const std::string& vocab_path, const std::vector<std::string>& texts,
                bool from_stdin, std::istream& in, std::ostream& out, std::ostream& err) {
  const Checkpoint ck = load_checkpoint(model_path);
  const Vocabulary vocab = Vocabulary::load(vocab_path);
  if (vocab.content_hash() != ck.vocab_hash)
    err << "warning: vocabulary does not match the checkpoint's vocabulary\n";
  Model model = ck.to_model();
  auto emit = [&](const std::string& text) {
    const Prediction p = predict(model, text, vocab);
    out << label_name(p.label) << '\t' << fixed4(p.confidence()) << '\n';
  };
  for (const auto& t : texts) emit(t);
  if (from_stdin) {
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      emit(line);
    }
  }
  return kExitOk;
}

int cmd_bench(TrainOptions o, std::ostream& out, std::ostream& err) {
  o.arch.clear();
  RunConfig base = resolve_run(o);
  const fs::path dir(o.out);
  ensure_dir(dir);
  Prepared p = prepare(base, o.vocab);
  p.vocab.save(dir / "vocab.txt");
  base.to_key_values().save(dir / "run_config.txt");

  // Learning rate follows each architecture unless explicitly configured.
  KeyValues file;
  if (!o.config.empty()) file = KeyValues::load(o.config);
  KeyValues cli;
  for (const auto& s : o.sets) cli.assign(s);
  const bool lr_fixed = file.contains("train.learning_rate") || cli.contains("train.learning_rate");

  std::ofstream board(dir / "leaderboard.csv", std::ios::binary);
  board << "arch,val_accuracy,macro_f1\n";
  for (std::size_t i = 0; i < kAllArchs.size(); ++i) {
    const Arch arch = kAllArchs[i];
    RunConfig rc = base;
    rc.model.arch = arch;
    rc.model.seed = base.model.seed + i;
    if (!lr_fixed) rc.train.learning_rate = default_learning_rate(arch);
    const std::string name(arch_name(arch));
    const fs::path tmp = dir / ("." + name + ".tmp");
    const fs::path final_dir = dir / name;
    fs::remove_all(tmp);
    ensure_dir(tmp);
    try {
      Model model(rc.model);
      const FitResult result = fit(model, p.train, p.val, rc.train);
      export_curves(result.curves, tmp / "curves.csv");
      rc.to_key_values().save(tmp / "run_config.txt");
      std::string row;
      if (!p.val.empty()) {
        const auto preds = to_labels(predict_labels(model, p.val, 32));
        const auto golds = to_labels(p.val.labels);
        const ConfusionMatrix cm = confusion(preds, golds);
        const ClassReport r = report(cm);
        export_report(r, cm, tmp / "report.csv", tmp / "confusion.csv");
        row = name + "," + fixed4(r.accuracy) + "," + fixed4(r.macro_f1);
      } else {
        row = name + ",0.0000,0.0000";
      }
      save_checkpoint(model, nullptr, p.vocab.content_hash(), tmp / "model.bin");
      fs::remove_all(final_dir);
      fs::rename(tmp, final_dir);
      board << row << '\n';
      out << row << '\n';
    } catch (const DivergenceError& e) {
      fs::remove_all(tmp);
      board << name << ",diverged,diverged\n";
      err << name << ": diverged (" << e.what() << ")\n";
    }
    board.flush();
  }
  return kExitOk;
}

int cmd_synth(const SynthConfig& cfg, const std::string& out_path, std::ostream& out) {
  const fs::path path(out_path);
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  const Corpus corpus = synth_corpus(cfg);
  save_corpus_csv(corpus, path);
  out << "wrote " << corpus.size() << " documents to " << path.string() << '\n';
  return kExitOk;
}

void add_data_options(CLI::App* cmd, DataOptions& d, bool required) {
  auto* opt = cmd->add_option("--data", d.path, "dataset: CSV file or event directory tree");
  if (required) opt->required();
  cmd->add_option("--format", d.format, "csv | dirs")->check(CLI::IsMember({"csv", "dirs"}));
}

void add_train_options(CLI::App* cmd, TrainOptions& o) {
  add_data_options(cmd, o.data, false);
  cmd->add_option("--config", o.config, "key=value config file");
  cmd->add_option("--seed", o.seed, "model and training seed");
  cmd->add_option("--epochs", o.epochs, "number of epochs");
  cmd->add_option("--vocab", o.vocab, "use this vocabulary instead of building one");
  cmd->add_option("--set", o.sets, "override any config key (key=value), repeatable");
  cmd->add_option("--out", o.out, "output directory")->required();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Neural fake-news classification toolkit", "fnd"};
  app.require_subcommand(1);

  DataOptions stats_data;
  std::string stats_out, stopwords;
  std::size_t bin_width = 10, top_k = 50;
  auto* stats = app.add_subcommand("stats", "corpus statistics: word-count histogram, term frequencies, class balance");
  add_data_options(stats, stats_data, true);
  stats->add_option("--out", stats_out, "output directory")->required();
  stats->add_option("--bin-width", bin_width, "histogram bin width in words")->check(CLI::PositiveNumber);
  stats->add_option("--top-k", top_k, "terms kept per frequency table")->check(CLI::PositiveNumber);
  stats->add_option("--stopwords", stopwords, "stopword file replacing the built-in list");

  TrainOptions train_opts;
  auto* train = app.add_subcommand("train", "train one classifier");
  add_train_options(train, train_opts);
  train->add_option("--arch", train_opts.arch, "cnn | lstm | bilstm | cnn-bilstm | transformer")
      ->check(CLI::IsMember({"cnn", "lstm", "bilstm", "cnn-bilstm", "transformer"}));

  std::string eval_model, eval_vocab, eval_out;
  DataOptions eval_data;
  auto* evaluate = app.add_subcommand("evaluate", "confusion matrix and per-class report");
  evaluate->add_option("--model", eval_model, "checkpoint file")->required();
  evaluate->add_option("--vocab", eval_vocab, "vocabulary file")->required();
  add_data_options(evaluate, eval_data, true);
  evaluate->add_option("--out", eval_out, "output directory")->required();

  std::string pred_model, pred_vocab;
  std::vector<std::string> pred_texts;
  bool pred_stdin = false;
  auto* predict_cmd = app.add_subcommand("predict", "classify texts");
  predict_cmd->add_option("--model", pred_model, "checkpoint file")->required();
  predict_cmd->add_option("--vocab", pred_vocab, "vocabulary file")->required();
  auto* text_opt = predict_cmd->add_option("--text", pred_texts, "text to classify, repeatable");
  auto* stdin_opt = predict_cmd->add_flag("--stdin", pred_stdin, "classify each line of standard input");
  text_opt->excludes(stdin_opt);

  TrainOptions bench_opts;
  auto* bench = app.add_subcommand("bench", "train and compare all five architectures on one split");
  add_train_options(bench, bench_opts);

  SynthConfig synth_cfg;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "write a synthetic labeled corpus as CSV");
  synth->add_option("--out", synth_out, "output CSV path")->required();
  synth->add_option("--docs", synth_cfg.num_docs, "number of documents");
  synth->add_option("--seed", synth_cfg.seed, "generator seed");
  synth->add_option("--strength", synth_cfg.keyword_strength, "probability a keyword matches the label");
  synth->add_option("--vocab-words", synth_cfg.vocab_words, "size of the word inventory");
  synth->add_option("--topics", synth_cfg.num_topics, "number of topics the phrase table is split into");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*stats) return cmd_stats(stats_data, stats_out, bin_width, top_k, stopwords, out);
    if (*train) {
      if (train_opts.data.path.empty() && train_opts.config.empty()) throw ConfigError("train needs --data or --config");
      return cmd_train(train_opts, out);
    }
    if (*evaluate) return cmd_evaluate(eval_model, eval_vocab, eval_data, eval_out, out);
    if (*predict_cmd && pred_texts.empty() && !pred_stdin) throw ConfigError("predict needs --text or --stdin");
    if (*predict_cmd) return cmd_predict(pred_model, pred_vocab, pred_texts, pred_stdin, in, out, err);
    if (*bench) return cmd_bench(bench_opts, out, err);
    if (*synth) return cmd_synth(synth_cfg, synth_out, out);
  } catch (const DivergenceError& e) {
    err << "error: training diverged at epoch " << e.epoch();
    if (e.batch() >= 0)
      err << " batch " << e.batch();
    else
      err << " during validation";
    err << ": " << e.what() << '\n';
    return kExitDiverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace fnd
