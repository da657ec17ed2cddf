#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fastpacket/error.hpp"
#include "fastpacket/metrics.hpp"

using namespace fastpacket;

namespace {

template <typename F>
Errc thrown_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::bad_config;
}

HexDocument tagged(std::string label, std::string day = {}) {
  HexDocument doc;
  doc.words = {"aaaa"};
  doc.label = std::move(label);
  doc.day = std::move(day);
  return doc;
}

// The worked example: 10 documents, binary, with
// TP = 2, FP = 1, FN = 1, TN = 6 for the "pos" label.
std::vector<std::pair<std::string, std::string>> ten_pairs() {
  return {
      {"pos", "pos"}, {"pos", "pos"}, {"pos", "neg"}, {"neg", "pos"},
      {"neg", "neg"}, {"neg", "neg"}, {"neg", "neg"}, {"neg", "neg"},
      {"neg", "neg"}, {"neg", "neg"},
  };
}

}  // namespace

TEST_CASE("day splits route documents by tag") {
  const std::vector<HexDocument> corpus = {
      tagged("A", "mon"), tagged("B", "tue"), tagged("A", "wed"),
      tagged("B", "mon"), tagged("A", "tue")};
  SplitSpec spec;
  spec.strategy = SplitStrategy::by_day;
  spec.train_days = {"mon", "tue"};
  spec.test_days = {"wed"};

  const auto split = split_corpus(corpus, spec);
  CHECK(split.train == std::vector<std::size_t>{0, 1, 3, 4});
  CHECK(split.test == std::vector<std::size_t>{2});
}

TEST_CASE("day splits reject bad partition specs") {
  const std::vector<HexDocument> corpus = {tagged("A", "mon"),
                                           tagged("B", "tue")};
  SplitSpec spec;
  spec.strategy = SplitStrategy::by_day;

  spec.train_days = {};
  spec.test_days = {"tue"};
  CHECK(thrown_code([&] { split_corpus(corpus, spec); }) == Errc::bad_config);

  spec.train_days = {"mon"};
  spec.test_days = {};
  CHECK(thrown_code([&] { split_corpus(corpus, spec); }) == Errc::bad_config);

  spec.train_days = {"mon", "tue"};
  spec.test_days = {"tue"};
  CHECK(thrown_code([&] { split_corpus(corpus, spec); }) == Errc::bad_config);

  spec.train_days = {"mon"};
  spec.test_days = {"fri"};
  CHECK(thrown_code([&] { split_corpus(corpus, spec); }) ==
        Errc::unknown_day);

  // all days land on one side
  const std::vector<HexDocument> one_day = {tagged("A", "mon"),
                                            tagged("B", "mon")};
  spec.train_days = {"mon"};
  spec.test_days = {"tue"};
  CHECK(thrown_code([&] { split_corpus(one_day, spec); }) ==
        Errc::empty_partition);

  CHECK(thrown_code([&] { split_corpus({}, spec); }) == Errc::empty_corpus);
}

TEST_CASE("stratified splits keep class shares and partition the corpus") {
  std::vector<HexDocument> corpus;
  for (int i = 0; i < 10; ++i) corpus.push_back(tagged("A"));
  for (int i = 0; i < 10; ++i) corpus.push_back(tagged("B"));

  SplitSpec spec;
  spec.fraction = 0.5;
  spec.seed = 4;
  const auto split = split_corpus(corpus, spec);

  CHECK(split.train.size() == 10);
  CHECK(split.test.size() == 10);
  const auto count_label = [&](const std::vector<std::size_t>& part,
                               const char* label) {
    return std::count_if(part.begin(), part.end(), [&](std::size_t i) {
      return corpus[i].label == label;
    });
  };
  CHECK(count_label(split.train, "A") == 5);
  CHECK(count_label(split.train, "B") == 5);

  // a partition: no overlap, full coverage
  std::set<std::size_t> all(split.train.begin(), split.train.end());
  for (const std::size_t i : split.test) CHECK(all.insert(i).second);
  CHECK(all.size() == corpus.size());

  CHECK(std::is_sorted(split.train.begin(), split.train.end()));
  CHECK(std::is_sorted(split.test.begin(), split.test.end()));

  const auto again = split_corpus(corpus, spec);
  CHECK(again.train == split.train);
  CHECK(again.test == split.test);

  spec.seed = 5;
  const auto other = split_corpus(corpus, spec);
  CHECK(other.train != split.train);
}

TEST_CASE("stratified splits validate fraction and labels") {
  const std::vector<HexDocument> corpus = {tagged("A"), tagged("A"),
                                           tagged("B"), tagged("B")};
  SplitSpec spec;

  spec.fraction = 0.0;
  CHECK(thrown_code([&] { split_corpus(corpus, spec); }) == Errc::bad_config);
  spec.fraction = 1.0;
  CHECK(thrown_code([&] { split_corpus(corpus, spec); }) == Errc::bad_config);

  spec.fraction = 0.5;
  std::vector<HexDocument> unlabeled = corpus;
  unlabeled[2].label.clear();
  CHECK(thrown_code([&] { split_corpus(unlabeled, spec); }) ==
        Errc::no_labels);

  // round(2 * 0.9) = 2 sends everything to train
  spec.fraction = 0.9;
  const std::vector<HexDocument> tiny = {tagged("A"), tagged("A")};
  CHECK(thrown_code([&] { split_corpus(tiny, spec); }) ==
        Errc::empty_partition);
}

TEST_CASE("the ten-document fixture reproduces the textbook numbers") {
  const auto report = evaluate_predictions(ten_pairs(), {"pos", "neg"});

  CHECK(report.confusion(0, 0) == 2);  // TP
  CHECK(report.confusion(1, 0) == 1);  // FP
  CHECK(report.confusion(0, 1) == 1);  // FN
  CHECK(report.confusion(1, 1) == 6);  // TN

  const double two_thirds = 2.0 / 3.0;
  CHECK(std::abs(report.precision[0] - two_thirds) < 1e-12);
  CHECK(std::abs(report.recall[0] - two_thirds) < 1e-12);
  CHECK(std::abs(report.f1[0] - two_thirds) < 1e-12);
  CHECK(std::abs(report.accuracy - 0.8) < 1e-12);

  const double f1_neg = 2.0 * (6.0 / 7.0) * (6.0 / 7.0) / (6.0 / 7.0 + 6.0 /
                                                           7.0);
  CHECK(std::abs(report.macro_f1 - (two_thirds + f1_neg) / 2.0) < 1e-12);
  CHECK(report.total == 10);
}

TEST_CASE("all-correct predictions score one everywhere") {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (int i = 0; i < 4; ++i) pairs.emplace_back("A", "A");
  for (int i = 0; i < 3; ++i) pairs.emplace_back("B", "B");
  const auto report = evaluate_predictions(pairs, {"A", "B"});
  CHECK(report.accuracy == 1.0);
  CHECK(report.macro_f1 == 1.0);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(report.precision[i] == 1.0);
    CHECK(report.recall[i] == 1.0);
    CHECK(report.f1[i] == 1.0);
  }
}

TEST_CASE("labels without truth support stay out of macro f1") {
  // "ghost" never appears as truth or prediction
  const std::vector<std::pair<std::string, std::string>> pairs = {
      {"A", "A"}, {"A", "A"}, {"B", "A"}};
  const auto report = evaluate_predictions(pairs, {"A", "B", "ghost"});

  CHECK_FALSE(report.precision_defined[2]);
  CHECK_FALSE(report.recall_defined[2]);
  CHECK_FALSE(report.f1_defined[2]);
  CHECK(report.precision[2] == 0.0);
  CHECK(report.recall[2] == 0.0);
  CHECK(report.f1[2] == 0.0);

  // B has truth support but zero recall; it still counts toward macro
  CHECK(report.recall_defined[1]);
  CHECK_FALSE(report.precision_defined[1]);
  const double f1_a = 2.0 * (2.0 / 3.0) * 1.0 / (2.0 / 3.0 + 1.0);
  CHECK(std::abs(report.macro_f1 - (f1_a + 0.0) / 2.0) < 1e-12);
}

TEST_CASE("metrics reject labels outside the label set") {
  CHECK(thrown_code([&] {
          evaluate_predictions({{"X", "A"}}, {"A"});
        }) == Errc::unknown_label);
  CHECK(thrown_code([&] {
          evaluate_predictions({{"A", "X"}}, {"A"});
        }) == Errc::unknown_label);
  CHECK(thrown_code([&] { evaluate_predictions({}, {}); }) ==
        Errc::no_labels);
}

TEST_CASE("pair order does not change any metric") {
  auto pairs = ten_pairs();
  const auto before = evaluate_predictions(pairs, {"pos", "neg"});
  std::reverse(pairs.begin(), pairs.end());
  std::swap(pairs[0], pairs[5]);
  const auto after = evaluate_predictions(pairs, {"pos", "neg"});

  CHECK(before.confusion == after.confusion);
  CHECK(before.accuracy == after.accuracy);
  CHECK(before.macro_f1 == after.macro_f1);
  CHECK(before.precision == after.precision);
  CHECK(before.recall == after.recall);
}

TEST_CASE("confusion counts add up") {
  const auto report = evaluate_predictions(ten_pairs(), {"pos", "neg"});
  CHECK(static_cast<std::uint64_t>(report.confusion.sum()) == report.total);
  const double trace_accuracy =
      static_cast<double>(report.confusion.trace()) /
      static_cast<double>(report.total);
  CHECK(report.accuracy == trace_accuracy);
}

TEST_CASE("reports render both formats with the expected rows") {
  const auto report = evaluate_predictions(ten_pairs(), {"pos", "neg"});

  const auto text = render_text_report(report);
  CHECK(text.find("documents: 10") != std::string::npos);
  CHECK(text.find("accuracy: 0.800000") != std::string::npos);
  CHECK(text.find("rows = truth") != std::string::npos);
  CHECK(text.find("pos: precision 0.666667") != std::string::npos);

  const auto csv = render_csv_report(report);
  CHECK(csv.rfind("metric,label,value\n", 0) == 0);
  CHECK(csv.find("accuracy,,0.800000\n") != std::string::npos);
  CHECK(csv.find("precision,pos,0.666667\n") != std::string::npos);
  CHECK(csv.find("confusion,pos:neg,1\n") != std::string::npos);
  CHECK(csv.find("confusion,neg:neg,6\n") != std::string::npos);
}
