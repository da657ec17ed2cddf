#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fastpacket/tokenizer.hpp"

namespace fastpacket {

enum class SplitStrategy { by_day, stratified_random };

struct SplitSpec {
  SplitStrategy strategy = SplitStrategy::stratified_random;
  std::vector<std::string> train_days;  // by_day only
  std::vector<std::string> test_days;   // by_day only
  double fraction = 0.8;                // train share, stratified only
  std::uint64_t seed = 1;               // stratified only
};

struct SplitResult {
  std::vector<std::size_t> train;  // indices into the corpus
  std::vector<std::size_t> test;
};

// by_day routes each document by its day tag; every day present in the
// corpus must appear in exactly one of the two lists. stratified_random
// shuffles within each label group and sends round(n * fraction) documents
// to train, so class proportions carry over.
SplitResult split_corpus(const std::vector<HexDocument>& corpus,
                         const SplitSpec& spec);

struct MetricsReport {
  std::vector<std::string> labels;
  // rows = truth, cols = prediction
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> confusion;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  // zero-denominator cases score 0 and are flagged here
  std::vector<bool> precision_defined;
  std::vector<bool> recall_defined;
  std::vector<bool> f1_defined;
  double accuracy = 0.0;
  double macro_f1 = 0.0;  // mean F1 over labels with truth support
  std::uint64_t total = 0;
};

// pairs are (truth, prediction); both sides must come from labels.
MetricsReport evaluate_predictions(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::vector<std::string>& labels);

std::string render_text_report(const MetricsReport& report);

// One `metric,label,value` row per line; confusion cells as
// `confusion,<truth>:<pred>,<count>`.
std::string render_csv_report(const MetricsReport& report);

}  // namespace fastpacket
