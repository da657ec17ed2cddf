#include "fastpacket/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "fastpacket/error.hpp"
#include "fastpacket/rng.hpp"

namespace fastpacket {

namespace {

SplitResult split_by_day(const std::vector<HexDocument>& corpus,
                         const SplitSpec& spec) {
  std::unordered_set<std::string> train_days(spec.train_days.begin(),
                                             spec.train_days.end());
  std::unordered_set<std::string> test_days(spec.test_days.begin(),
                                            spec.test_days.end());
  if (train_days.empty() || test_days.empty()) {
    raise(Errc::bad_config, "by-day split needs train and test days");
  }
  for (const auto& day : train_days) {
    if (test_days.count(day) != 0) {
      raise(Errc::bad_config, "day in both partitions: " + day);
    }
  }

  SplitResult result;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const std::string& day = corpus[i].day;
    if (train_days.count(day) != 0) {
      result.train.push_back(i);
    } else if (test_days.count(day) != 0) {
      result.test.push_back(i);
    } else {
      raise(Errc::unknown_day, "day not assigned to a partition: " +
                                   (day.empty() ? "<none>" : day));
    }
  }
  if (result.train.empty()) raise(Errc::empty_partition, "train set is empty");
  if (result.test.empty()) raise(Errc::empty_partition, "test set is empty");
  return result;
}

SplitResult split_stratified(const std::vector<HexDocument>& corpus,
                             const SplitSpec& spec) {
  if (!(spec.fraction > 0.0) || !(spec.fraction < 1.0)) {
    raise(Errc::bad_config, "fraction must be in (0, 1)");
  }

  // label groups in first-seen order so the shuffle sequence is reproducible
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const std::string& label = corpus[i].label;
    if (label.empty()) {
      raise(Errc::no_labels, "stratified split needs labeled documents");
    }
    auto [it, inserted] = groups.try_emplace(label);
    if (inserted) order.push_back(label);
    it->second.push_back(i);
  }

  Rng rng(spec.seed);
  SplitResult result;
  for (const auto& label : order) {
    auto& indices = groups[label];
    for (std::size_t i = indices.size(); i > 1; --i) {
      std::swap(indices[i - 1],
                indices[static_cast<std::size_t>(rng.below(i))]);
    }
    const auto n = static_cast<double>(indices.size());
    const auto n_train = static_cast<std::size_t>(n * spec.fraction + 0.5);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      (i < n_train ? result.train : result.test).push_back(indices[i]);
    }
  }
  std::sort(result.train.begin(), result.train.end());
  std::sort(result.test.begin(), result.test.end());
  if (result.train.empty()) raise(Errc::empty_partition, "train set is empty");
  if (result.test.empty()) raise(Errc::empty_partition, "test set is empty");
  return result;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

SplitResult split_corpus(const std::vector<HexDocument>& corpus,
                         const SplitSpec& spec) {
  if (corpus.empty()) raise(Errc::empty_corpus, "nothing to split");
  return spec.strategy == SplitStrategy::by_day
             ? split_by_day(corpus, spec)
             : split_stratified(corpus, spec);
}

MetricsReport evaluate_predictions(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::vector<std::string>& labels) {
  if (labels.empty()) raise(Errc::no_labels, "empty label set");
  std::unordered_map<std::string_view, Eigen::Index> index;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    index.emplace(labels[i], static_cast<Eigen::Index>(i));
  }

  MetricsReport report;
  report.labels = labels;
  const auto k = static_cast<Eigen::Index>(labels.size());
  report.confusion.setZero(k, k);

  for (const auto& [truth, pred] : pairs) {
    const auto ti = index.find(truth);
    if (ti == index.end()) {
      raise(Errc::unknown_label, "truth label not in label set: " + truth);
    }
    const auto pi = index.find(pred);
    if (pi == index.end()) {
      raise(Errc::unknown_label, "predicted label not in label set: " + pred);
    }
    ++report.confusion(ti->second, pi->second);
  }
  report.total = static_cast<std::uint64_t>(pairs.size());

  report.precision.resize(labels.size());
  report.recall.resize(labels.size());
  report.f1.resize(labels.size());
  report.precision_defined.resize(labels.size());
  report.recall_defined.resize(labels.size());
  report.f1_defined.resize(labels.size());

  std::int64_t correct = 0;
  double f1_sum = 0.0;
  std::int64_t supported = 0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const std::int64_t tp = report.confusion(i, i);
    const std::int64_t predicted = report.confusion.col(i).sum();
    const std::int64_t truth = report.confusion.row(i).sum();
    correct += tp;

    const auto at = static_cast<std::size_t>(i);
    report.precision_defined[at] = predicted > 0;
    report.recall_defined[at] = truth > 0;
    report.precision[at] =
        predicted > 0 ? static_cast<double>(tp) / static_cast<double>(predicted)
                      : 0.0;
    report.recall[at] =
        truth > 0 ? static_cast<double>(tp) / static_cast<double>(truth) : 0.0;
    const double pr = report.precision[at] + report.recall[at];
    report.f1_defined[at] = pr > 0.0;
    report.f1[at] =
        pr > 0.0 ? 2.0 * report.precision[at] * report.recall[at] / pr : 0.0;

    if (truth > 0) {
      f1_sum += report.f1[at];
      ++supported;
    }
  }
  report.accuracy = report.total > 0 ? static_cast<double>(correct) /
                                           static_cast<double>(report.total)
                                     : 0.0;
  report.macro_f1 = supported > 0 ? f1_sum / static_cast<double>(supported)
                                  : 0.0;
  return report;
}

std::string render_text_report(const MetricsReport& report) {
  std::ostringstream out;
  out << "documents: " << report.total << "\n";
  out << "accuracy: " << format_double(report.accuracy) << "\n";
  out << "macro_f1: " << format_double(report.macro_f1) << "\n\n";

  std::size_t width = 9;  // "precision"
  for (const auto& label : report.labels) width = std::max(width,
                                                           label.size());
  out << "confusion (rows = truth, cols = prediction):\n";
  out << std::string(width, ' ');
  for (const auto& label : report.labels) out << "  " << label;
  out << "\n";
  for (Eigen::Index i = 0; i < report.confusion.rows(); ++i) {
    const auto& label = report.labels[static_cast<std::size_t>(i)];
    out << label << std::string(width - label.size(), ' ');
    for (Eigen::Index j = 0; j < report.confusion.cols(); ++j) {
      const auto cell = std::to_string(report.confusion(i, j));
      const auto col = report.labels[static_cast<std::size_t>(j)].size();
      out << "  " << std::string(col > cell.size() ? col - cell.size() : 0,
                                 ' ')
          << cell;
    }
    out << "\n";
  }

  out << "\nper label:\n";
  for (std::size_t i = 0; i < report.labels.size(); ++i) {
    out << report.labels[i] << ": precision "
        << format_double(report.precision[i])
        << (report.precision_defined[i] ? "" : " (no predictions)")
        << ", recall " << format_double(report.recall[i])
        << (report.recall_defined[i] ? "" : " (no truth)") << ", f1 "
        << format_double(report.f1[i]) << "\n";
  }
  return out.str();
}

std::string render_csv_report(const MetricsReport& report) {
  std::ostringstream out;
  out << "metric,label,value\n";
  out << "documents,," << report.total << "\n";
  out << "accuracy,," << format_double(report.accuracy) << "\n";
  out << "macro_f1,," << format_double(report.macro_f1) << "\n";
  for (std::size_t i = 0; i < report.labels.size(); ++i) {
    out << "precision," << report.labels[i] << ","
        << format_double(report.precision[i]) << "\n";
    out << "recall," << report.labels[i] << ","
        << format_double(report.recall[i]) << "\n";
    out << "f1," << report.labels[i] << ","
        << format_double(report.f1[i]) << "\n";
  }
  for (Eigen::Index i = 0; i < report.confusion.rows(); ++i) {
    for (Eigen::Index j = 0; j < report.confusion.cols(); ++j) {
      out << "confusion," << report.labels[static_cast<std::size_t>(i)] << ":"
          << report.labels[static_cast<std::size_t>(j)] << ","
          << report.confusion(i, j) << "\n";
    }
  }
  return out.str();
}

}  // namespace fastpacket
