#include <gtest/gtest.h>

#include <algorithm>
#include <cctype>
#include <map>
#include <random>
#include <sstream>

#include "fnd/corpus.hpp"
#include "fnd/csv.hpp"
#include "fnd/error.hpp"
#include "../support/temp_dir.hpp"

namespace fnd {
namespace {

using testing::TempDir;
using testing::write_file;

Document doc(std::string id, std::string text, Label label) {
  return Document{std::move(id), std::move(text), label, std::nullopt};
}

Corpus balanced(std::size_t per_class) {
  std::vector<Document> docs;
  for (std::size_t i = 0; i < per_class; ++i) {
    docs.push_back(doc("f" + std::to_string(i), "fake " + std::to_string(i), Label::Fake));
    docs.push_back(doc("r" + std::to_string(i), "real " + std::to_string(i), Label::Real));
  }
  return Corpus(std::move(docs));
}

std::size_t count_label(const Corpus& c, Label l) {
  return static_cast<std::size_t>(std::count_if(c.documents().begin(), c.documents().end(),
                                                [&](const Document& d) { return d.label == l; }));
}

TEST(Csv, QuotedFieldsAndEscapes) {
  auto rows = csv::parse("a,b\n\"x, y\",\"say \"\"hi\"\"\"\r\n\n\"multi\nline\",z\n");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][0], "x, y");
  EXPECT_EQ(rows[1][1], "say \"hi\"");
  EXPECT_EQ(rows[2][0], "multi\nline");
  EXPECT_EQ(csv::escape("plain"), "plain");
  EXPECT_EQ(csv::escape("a\"b"), "\"a\"\"b\"");
}

TEST(LoadCorpus, CsvRowsMapLabels) {
  TempDir dir;
  write_file(dir / "d.csv", "text,label\na b c,fake\nd e,real\n");
  Corpus c = load_corpus(dir / "d.csv", CorpusFormat::Csv);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].text, "a b c");
  EXPECT_EQ(c[0].label, Label::Fake);
  EXPECT_EQ(c[1].label, Label::Real);
  EXPECT_EQ(c.class_counts().at(Label::Fake), 1u);
  EXPECT_EQ(c.class_counts().at(Label::Real), 1u);
}

TEST(LoadCorpus, LabelsAreCaseInsensitiveAndNumeric) {
  TempDir dir;
  write_file(dir / "d.csv", "label,text\nFAKE,x\nReal,y\n1,z\n0,w\n");
  Corpus c = load_corpus(dir / "d.csv", CorpusFormat::Csv);
  ASSERT_EQ(c.size(), 4u);
  EXPECT_EQ(c[0].label, Label::Fake);
  EXPECT_EQ(c[1].label, Label::Real);
  EXPECT_EQ(c[2].label, Label::Fake);
  EXPECT_EQ(c[3].label, Label::Real);
}

TEST(LoadCorpus, UnknownLabelNamesTheRow) {
  TempDir dir;
  write_file(dir / "d.csv", "text,label\nok,fake\nhmm,maybe\n");
  try {
    load_corpus(dir / "d.csv", CorpusFormat::Csv);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("maybe"), std::string::npos) << e.what();
  }
}

TEST(LoadCorpus, Errors) {
  TempDir dir;
  EXPECT_THROW(load_corpus(dir / "missing.csv", CorpusFormat::Csv), DataError);
  write_file(dir / "bad_header.csv", "body,label\nx,fake\n");
  EXPECT_THROW(load_corpus(dir / "bad_header.csv", CorpusFormat::Csv), DataError);
  write_file(dir / "empty.csv", "text,label\n");
  EXPECT_THROW(load_corpus(dir / "empty.csv", CorpusFormat::Csv), DataError);
  write_file(dir / "blank.csv", "text,label\n   ,fake\n");
  EXPECT_THROW(load_corpus(dir / "blank.csv", CorpusFormat::Csv), DataError);
}

TEST(LoadCorpus, EventDirectories) {
  TempDir dir;
  write_file(dir / "tree/ev1/fake/x.txt", "fake words here");
  write_file(dir / "tree/ev1/real/y.txt", "real words");
  Corpus c = load_corpus(dir / "tree", CorpusFormat::EventDirs);
  ASSERT_EQ(c.size(), 2u);
  for (const auto& d : c.documents()) {
    ASSERT_TRUE(d.event.has_value());
    EXPECT_EQ(*d.event, "ev1");
  }
  EXPECT_EQ(c.class_counts().at(Label::Fake), 1u);
  EXPECT_EQ(c.class_counts().at(Label::Real), 1u);
  Corpus again = load_corpus(dir / "tree", CorpusFormat::EventDirs);
  EXPECT_EQ(c.documents(), again.documents());
}

TEST(LoadCorpus, EventDirectoriesRejectUnknownLabelDir) {
  TempDir dir;
  write_file(dir / "tree/ev1/unsure/x.txt", "text");
  EXPECT_THROW(load_corpus(dir / "tree", CorpusFormat::EventDirs), DataError);
}

TEST(CorpusType, RejectsDuplicateIdsAndEmptyText) {
  EXPECT_THROW(Corpus({doc("a", "x", Label::Fake), doc("a", "y", Label::Real)}), DataError);
  EXPECT_THROW(Corpus({doc("a", " \t\n", Label::Fake)}), DataError);
}

TEST(CorpusRoundTrip, SaveThenLoadGivesEqualDocuments) {
  TempDir dir;
  std::vector<Document> docs{
      Document{"row-1", "comma, \"quote\" and\nnewline", Label::Fake, std::string("ev")},
      Document{"row-2", "plain", Label::Real, std::string("other")},
      Document{"row-3", "ünïcode ✓", Label::Real, std::nullopt},
  };
  Corpus c(docs);
  save_corpus_csv(c, dir / "c.csv");
  Corpus back = load_corpus(dir / "c.csv", CorpusFormat::Csv);
  ASSERT_EQ(back.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(back[i].text, c[i].text);
    EXPECT_EQ(back[i].label, c[i].label);
    EXPECT_EQ(back[i].event.value_or(""), c[i].event.value_or(""));
  }
}

TEST(Split, TenDocsEightyTwenty) {
  Corpus c = balanced(5);
  auto parts = split(c, SplitSpec{0.8, 0.2, 0.0, 7});
  EXPECT_EQ(parts.train.size(), 8u);
  EXPECT_EQ(parts.val.size(), 2u);
  EXPECT_EQ(parts.test.size(), 0u);
  EXPECT_EQ(count_label(parts.train, Label::Fake), 4u);
  EXPECT_EQ(count_label(parts.val, Label::Fake), 1u);
  EXPECT_EQ(count_label(parts.val, Label::Real), 1u);
}

TEST(Split, SingleDocumentGoesToTrain) {
  Corpus c({doc("only", "x", Label::Fake)});
  auto parts = split(c, SplitSpec{});
  EXPECT_EQ(parts.train.size(), 1u);
  EXPECT_EQ(parts.val.size(), 0u);
}

TEST(Split, ExtremeFractionsStillKeepATrainingDocumentPerClass) {
  Corpus c = balanced(50);
  auto parts = split(c, SplitSpec{0.0001, 0.4999, 0.5, 1});
  EXPECT_EQ(count_label(parts.train, Label::Fake), 1u);
  EXPECT_EQ(count_label(parts.train, Label::Real), 1u);
  EXPECT_THROW(split(Corpus(), SplitSpec{}), DataError);
}

TEST(Split, InvalidFractions) {
  EXPECT_THROW((SplitSpec{0.5, 0.2, 0.0, 1}.validate()), ConfigError);
  EXPECT_THROW((SplitSpec{1.0, 0.0, 0.0, 1}.validate()), ConfigError);
  EXPECT_NO_THROW((SplitSpec{0.7, 0.2, 0.1, 1}.validate()));
}

TEST(Split, PartitionPropertyOverRandomCorpora) {
  std::mt19937_64 gen(123);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = 1 + gen() % 200;
    std::vector<Document> docs;
    for (std::size_t i = 0; i < n; ++i)
      docs.push_back(doc("d" + std::to_string(i), "t" + std::to_string(i),
                         gen() % 3 == 0 ? Label::Fake : Label::Real));
    Corpus c(docs);
    const double val = 0.1 + 0.05 * (gen() % 5), test = (gen() % 2) ? 0.1 : 0.0;
    SplitSpec spec{1.0 - val - test, val, test, gen()};
    CorpusSplit parts;
    try {
      parts = split(c, spec);
    } catch (const DataError&) {
      continue;
    }
    std::vector<std::string> ids;
    for (const Corpus* p : {&parts.train, &parts.val, &parts.test})
      for (const auto& d : p->documents()) ids.push_back(d.id);
    std::vector<std::string> expected;
    for (const auto& d : docs) expected.push_back(d.id);
    std::sort(ids.begin(), ids.end());
    std::sort(expected.begin(), expected.end());
    ASSERT_EQ(ids, expected) << "trial " << trial;

    for (Label l : {Label::Fake, Label::Real}) {
      const std::size_t k = count_label(c, l);
      const auto v = static_cast<std::size_t>(std::floor(val * static_cast<double>(k)));
      const auto t = static_cast<std::size_t>(std::floor(test * static_cast<double>(k)));
      EXPECT_EQ(count_label(parts.val, l), v);
      EXPECT_EQ(count_label(parts.test, l), t);
      EXPECT_EQ(count_label(parts.train, l), k - v - t);
    }
    auto again = split(c, spec);
    EXPECT_EQ(again.train.documents(), parts.train.documents());
    EXPECT_EQ(again.val.documents(), parts.val.documents());
  }
}

TEST(Histogram, WorkedExample) {
  Corpus c({doc("a", "x y z", Label::Fake), doc("b", "x y z", Label::Real),
            doc("c", "one two three four five", Label::Real)});
  Histogram h = word_count_histogram(c, 5);
  EXPECT_EQ(h.bin_edges, (std::vector<std::size_t>{0, 5, 10}));
  EXPECT_EQ(h.bin_counts, (std::vector<std::size_t>{2, 1}));
}

TEST(Histogram, SingleWord) {
  Histogram h = word_count_histogram(Corpus({doc("a", "a", Label::Fake)}), 10);
  ASSERT_EQ(h.bin_counts.size(), 1u);
  EXPECT_EQ(h.bin_counts[0], 1u);
}

TEST(Histogram, CountsSumToDocumentsAndBinsCoverRange) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Document> docs;
    const std::size_t n = 1 + gen() % 50;
    for (std::size_t i = 0; i < n; ++i) {
      std::string text;
      const std::size_t words = 1 + gen() % 120;
      for (std::size_t w = 0; w < words; ++w) text += (gen() % 2 ? " w" : "\tw\n");
      docs.push_back(doc(std::to_string(i), text, Label::Real));
    }
    Corpus c(docs);
    const std::size_t width = 1 + gen() % 20;
    Histogram h = word_count_histogram(c, width);
    ASSERT_EQ(h.bin_edges.size(), h.bin_counts.size() + 1);
    std::size_t total = 0;
    for (auto x : h.bin_counts) total += x;
    EXPECT_EQ(total, n);
    for (const auto& d : docs) {
      const std::size_t wc = word_count(d.text);
      EXPECT_GE(wc, h.bin_edges.front());
      EXPECT_LT(wc, h.bin_edges.back());
    }
    for (std::size_t i = 1; i < h.bin_edges.size(); ++i)
      EXPECT_EQ(h.bin_edges[i] - h.bin_edges[i - 1], width);
  }
}

TEST(TermFrequencies, WorkedExamples) {
  Corpus c({doc("a", "A a b.", Label::Fake)});
  auto t = term_frequencies(c, FreqScope::All, {}, 10);
  using Entries = std::vector<std::pair<std::string, std::size_t>>;
  EXPECT_EQ(t.entries, (Entries{{"a", 2}, {"b", 1}}));
  EXPECT_EQ(term_frequencies(c, FreqScope::All, {"a"}, 10).entries, (Entries{{"b", 1}}));
}

TEST(TermFrequencies, ScopeFiltersByLabel) {
  Corpus c({doc("a", "fake fake", Label::Fake), doc("b", "real", Label::Real)});
  using Entries = std::vector<std::pair<std::string, std::size_t>>;
  EXPECT_EQ(term_frequencies(c, FreqScope::FakeOnly, {}, 5).entries, (Entries{{"fake", 2}}));
  EXPECT_EQ(term_frequencies(c, FreqScope::RealOnly, {}, 5).entries, (Entries{{"real", 1}}));
}

TEST(TermFrequencies, MatchesBruteForceCount) {
  std::mt19937_64 gen(77);
  const std::vector<std::string> pieces{"Apple", "apple,", "(pear)", "...", "kiwi!", "the",
                                        "The", "x-y", "'quoted'", "a", "?!", "Banana"};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Document> docs;
    std::size_t tokens = 0;
    while (tokens < 10000) {
      std::string text;
      const std::size_t len = 1 + gen() % 60;
      for (std::size_t i = 0; i < len; ++i) text += pieces[gen() % pieces.size()] + " ";
      tokens += len;
      docs.push_back(doc(std::to_string(docs.size()), text, gen() % 2 ? Label::Fake : Label::Real));
    }
    Corpus c(docs);
    const std::set<std::string> stop{"the", "a"};

    std::map<std::string, std::size_t> oracle;
    for (const auto& d : docs) {
      std::istringstream in(d.text);
      std::string w;
      while (in >> w) {
        std::size_t b = 0, e = w.size();
        while (b < e && std::ispunct(static_cast<unsigned char>(w[b]))) ++b;
        while (e > b && std::ispunct(static_cast<unsigned char>(w[e - 1]))) --e;
        std::string term = w.substr(b, e - b);
        for (auto& ch : term) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        if (term.empty() || stop.count(term)) continue;
        ++oracle[term];
      }
    }
    std::vector<std::pair<std::string, std::size_t>> expected(oracle.begin(), oracle.end());
    std::stable_sort(expected.begin(), expected.end(),
                     [](const auto& x, const auto& y) { return x.second > y.second; });
    auto table = term_frequencies(c, FreqScope::All, stop, 1000);
    EXPECT_EQ(table.entries, expected);
    for (std::size_t i = 1; i < table.entries.size(); ++i)
      EXPECT_GE(table.entries[i - 1].second, table.entries[i].second);
  }
}

TEST(TermFrequencies, TopKTruncates) {
  Corpus c({doc("a", "a b c d e", Label::Fake)});
  EXPECT_EQ(term_frequencies(c, FreqScope::All, {}, 2).entries.size(), 2u);
  EXPECT_THROW(term_frequencies(c, FreqScope::All, {}, 0), ConfigError);
}

TEST(Stopwords, DefaultListAndFileOverride) {
  EXPECT_GE(default_stopwords().size(), 40u);
  EXPECT_TRUE(default_stopwords().count("the"));
  TempDir dir;
  write_file(dir / "stop.txt", "# comment\nFoo\n\nbar\n");
  EXPECT_EQ(load_stopwords(dir / "stop.txt"), (std::set<std::string>{"foo", "bar"}));
}

TEST(ClassBalance, Examples) {
  ClassCounts empty = class_balance(Corpus());
  EXPECT_EQ(empty.at(Label::Fake), 0u);
  EXPECT_EQ(empty.at(Label::Real), 0u);

  ClassCounts two = class_balance(Corpus({doc("a", "x", Label::Fake), doc("b", "y", Label::Fake)}));
  EXPECT_EQ(two.at(Label::Fake), 2u);
  EXPECT_EQ(two.at(Label::Real), 0u);

  // Shape of the larger evaluation set in the published report.
  std::vector<Document> docs;
  for (int i = 0; i < 1115; ++i) docs.push_back(doc("r" + std::to_string(i), "r", Label::Real));
  for (int i = 0; i < 371; ++i) docs.push_back(doc("f" + std::to_string(i), "f", Label::Fake));
  ClassCounts big = class_balance(Corpus(docs));
  EXPECT_EQ(big.at(Label::Real), 1115u);
  EXPECT_EQ(big.at(Label::Fake), 371u);
}

TEST(MedianWordCount, OddAndEven) {
  EXPECT_DOUBLE_EQ(median_word_count(Corpus({doc("a", "x", Label::Fake), doc("b", "x y y", Label::Real),
                                             doc("c", "x y", Label::Real)})),
                   2.0);
  EXPECT_DOUBLE_EQ(median_word_count(Corpus({doc("a", "x", Label::Fake), doc("b", "x y", Label::Real)})),
                   1.5);
}

}  // namespace
}  // namespace fnd
