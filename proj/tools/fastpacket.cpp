#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "fastpacket/corpus.hpp"
#include "fastpacket/error.hpp"
#include "fastpacket/flow.hpp"
#include "fastpacket/labels.hpp"
#include "fastpacket/metrics.hpp"
#include "fastpacket/model.hpp"
#include "fastpacket/pcap.hpp"
#include "fastpacket/store.hpp"
#include "fastpacket/svm.hpp"
#include "fastpacket/tokenizer.hpp"
#include "fastpacket/train.hpp"

namespace fp = fastpacket;

namespace {

struct IngestArgs {
  std::vector<std::string> pcaps;
  std::vector<std::string> days;
  std::string labels_csv;
  std::string slice = "ip";
  unsigned word_bytes = 2;
  std::size_t max_bytes = 1500;
  std::string default_label = "BENIGN";
  std::string out;
};

struct HyperArgs {
  std::string corpus;
  std::string pretrained;  // train only
  int dim = 64;
  double lr = 0.1;
  int epochs = 5;
  unsigned minn = 2;
  unsigned maxn = 4;
  std::uint64_t buckets = 2'000'000;
  int negatives = 5;
  int window = 5;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out;
};

struct PredictArgs {
  std::string model;
  std::string corpus;
  int k = 1;
  std::string out;
};

struct EvaluateArgs {
  std::string model;
  std::string corpus;
  std::string svm_positive;
  std::string split = "stratified";
  std::string train_days;
  std::string test_days;
  double fraction = 0.8;
  std::uint64_t seed = 1;
  double lambda = 0.01;
  int svm_epochs = 20;
  std::string report;
};

struct ExportArgs {
  std::string model;
  std::string scope = "words";
  std::string out;
};

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(csv);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::string format_prob(float p) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", static_cast<double>(p));
  return buf;
}

// Word width in bytes implied by the widest word in the corpus; a corpus
// written with --word-bytes N has at least one full-width word.
unsigned infer_word_bytes(const std::vector<fp::HexDocument>& corpus) {
  std::size_t widest = 2;
  for (const auto& doc : corpus) {
    for (const auto& word : doc.words) widest = std::max(widest, word.size());
  }
  return static_cast<unsigned>((widest + 1) / 2);
}

int run_ingest(const IngestArgs& args) {
  if (!args.days.empty() && args.days.size() != 1 &&
      args.days.size() != args.pcaps.size()) {
    throw CLI::ValidationError(
        "--day", "pass one day for all captures or one per capture");
  }
  const auto policy = fp::slice_policy_from_name(args.slice);
  if (!policy.has_value()) {
    throw CLI::ValidationError("--slice", "unknown slice: " + args.slice);
  }

  fp::TokenizerConfig tokenizer;
  tokenizer.word_bytes = args.word_bytes;
  tokenizer.max_packet_bytes = args.max_bytes;
  tokenizer.maxn = std::min<unsigned>(tokenizer.maxn,
                                      2 * tokenizer.word_bytes + 2);
  tokenizer.minn = std::min(tokenizer.minn, tokenizer.maxn);
  tokenizer.validate();

  std::optional<fp::LabelTable> table;
  if (!args.labels_csv.empty()) {
    table = fp::load_label_table_file(args.labels_csv);
  }

  std::vector<fp::HexDocument> corpus;
  for (std::size_t i = 0; i < args.pcaps.size(); ++i) {
    const std::string& path = args.pcaps[i];
    const std::string day =
        args.days.empty() ? std::string{}
                          : args.days[args.days.size() == 1 ? 0 : i];
    const auto packets = fp::read_pcap_file(path);
    for (const auto& pkt : packets) {
      const auto bytes = fp::slice_embedding_bytes(pkt, *policy);
      std::string label;
      if (table.has_value()) {
        label = fp::label_packet(fp::extract_five_tuple(pkt),
                                 pkt.ts_seconds(), *table,
                                 args.default_label);
      }
      corpus.push_back(fp::make_document(bytes, tokenizer, std::move(label),
                                         {path, pkt.index}, day));
    }
  }

  fp::write_corpus_file(args.out, corpus);
  std::cerr << "ingested " << corpus.size() << " packets from "
            << args.pcaps.size() << " capture(s) into " << args.out << "\n";
  return 0;
}

fp::TokenizerConfig tokenizer_from_args(
    const HyperArgs& args, const std::vector<fp::HexDocument>& corpus) {
  fp::TokenizerConfig tokenizer;
  tokenizer.word_bytes = infer_word_bytes(corpus);
  tokenizer.minn = args.minn;
  tokenizer.maxn = args.maxn;
  tokenizer.buckets = args.buckets;
  tokenizer.validate();
  return tokenizer;
}

fp::ModelConfig model_from_args(const HyperArgs& args, fp::ModelMode mode) {
  fp::ModelConfig config;
  config.dim = args.dim;
  config.lr0 = args.lr;
  config.epochs = args.epochs;
  config.negatives = args.negatives;
  config.window = args.window;
  config.seed = args.seed;
  config.threads = args.threads;
  config.mode = mode;
  config.validate();
  return config;
}

void report_training(const fp::TrainReport& report) {
  for (std::size_t e = 0; e < report.epoch_mean_loss.size(); ++e) {
    std::cerr << "epoch " << (e + 1) << " mean loss "
              << report.epoch_mean_loss[e] << "\n";
  }
  std::cerr << report.tokens_processed << " tokens in " << report.wall_seconds
            << "s";
  if (report.documents_skipped > 0) {
    std::cerr << " (" << report.documents_skipped << " empty documents"
              << " skipped)";
  }
  std::cerr << "\n";
}

int run_pretrain(const HyperArgs& args) {
  const auto corpus = fp::read_corpus_file(args.corpus);
  const auto tokenizer = tokenizer_from_args(args, corpus);
  const auto config = model_from_args(args, fp::ModelMode::skipgram);

  auto [model, report] = fp::train_skipgram_corpus(corpus, config, tokenizer);
  report_training(report);
  fp::save_model_file({std::move(model), std::nullopt}, args.out);
  std::cerr << "wrote " << args.out << "\n";
  return 0;
}

int run_train(const HyperArgs& args) {
  const auto corpus = fp::read_corpus_file(args.corpus);
  const auto tokenizer = tokenizer_from_args(args, corpus);
  const auto config = model_from_args(args, fp::ModelMode::supervised);

  const fp::Vocabulary vocab = fp::Vocabulary::build(corpus, tokenizer);
  auto model = fp::init_model<float>(config, vocab, tokenizer,
                                     fp::collect_labels(corpus));
  if (!args.pretrained.empty()) {
    const std::size_t applied =
        fp::load_pretrained_file(model, args.pretrained);
    std::cerr << "applied " << applied << " pretrained rows\n";
  }

  fp::TrainReport report;
  const auto examples =
      fp::corpus_to_examples(corpus, model.vocab, model.tokenizer,
                             model.labels, &report.documents_skipped);
  const auto inner = fp::train_supervised(model, examples);
  report.epoch_mean_loss = inner.epoch_mean_loss;
  report.tokens_processed = inner.tokens_processed;
  report.wall_seconds = inner.wall_seconds;
  report_training(report);

  fp::save_model_file({std::move(model), std::nullopt}, args.out);
  std::cerr << "wrote " << args.out << "\n";
  return 0;
}

int run_predict(const PredictArgs& args) {
  const auto bundle = fp::load_model_file(args.model);
  const auto corpus = fp::read_corpus_file(args.corpus);

  std::ofstream out(args.out);
  if (!out) fp::raise(fp::Errc::io_failure, "cannot open " + args.out);
  for (const auto& doc : corpus) {
    const auto ids =
        fp::doc_to_ids(doc, bundle.model.vocab, bundle.model.tokenizer);
    if (ids.empty()) {
      out << "\n";  // keeps line alignment with the corpus
      continue;
    }
    const auto top = fp::predict(bundle.model,
                                 std::span<const fp::TokenId>(ids), args.k);
    for (std::size_t i = 0; i < top.size(); ++i) {
      out << (i == 0 ? "" : "\t") << top[i].first << "\t"
          << format_prob(top[i].second);
    }
    out << "\n";
  }
  if (!out) fp::raise(fp::Errc::io_failure, "failed to write " + args.out);
  return 0;
}

std::vector<fp::HexDocument> select(const std::vector<fp::HexDocument>& corpus,
                                    const std::vector<std::size_t>& indices) {
  std::vector<fp::HexDocument> subset;
  subset.reserve(indices.size());
  for (const std::size_t i : indices) subset.push_back(corpus[i]);
  return subset;
}

int run_evaluate(const EvaluateArgs& args) {
  const auto bundle = fp::load_model_file(args.model);
  const auto corpus = fp::read_corpus_file(args.corpus);

  fp::SplitSpec spec;
  spec.strategy = args.split == "by-day" ? fp::SplitStrategy::by_day
                                         : fp::SplitStrategy::stratified_random;
  spec.train_days = split_list(args.train_days);
  spec.test_days = split_list(args.test_days);
  spec.fraction = args.fraction;
  spec.seed = args.seed;
  const auto split = fp::split_corpus(corpus, spec);
  const auto train_docs = select(corpus, split.train);
  const auto test_docs = select(corpus, split.test);

  std::vector<std::pair<std::string, std::string>> pairs;
  std::vector<std::string> labels;
  pairs.reserve(test_docs.size());

  if (args.svm_positive.empty()) {
    // Fresh supervised run on the train side with the stored
    // hyperparameters; the test side stays held out.
    fp::ModelConfig config = bundle.model.config;
    config.mode = fp::ModelMode::supervised;
    auto [model, report] =
        fp::train_supervised_corpus(train_docs, config,
                                    bundle.model.tokenizer);
    report_training(report);
    labels = model.labels;
    for (const auto& doc : test_docs) {
      if (doc.label.empty()) {
        fp::raise(fp::Errc::no_labels, "unlabeled document in test split");
      }
      const auto ids = fp::doc_to_ids(doc, model.vocab, model.tokenizer);
      if (ids.empty()) continue;
      const auto top =
          fp::predict(model, std::span<const fp::TokenId>(ids), 1);
      pairs.emplace_back(doc.label, top.front().first);
      if (std::find(labels.begin(), labels.end(), doc.label) ==
          labels.end()) {
        labels.push_back(doc.label);
      }
    }
  } else {
    // Frozen embeddings from the stored model; Pegasos on the train side.
    const std::string& positive = args.svm_positive;
    const std::string negative = "rest";
    const auto train_set =
        fp::embed_dataset(bundle.model, train_docs, positive);
    const auto svm = fp::pegasos_train(train_set,
                                       static_cast<float>(args.lambda),
                                       args.svm_epochs, args.seed);
    labels = {positive, negative};
    for (const auto& doc : test_docs) {
      if (doc.label.empty()) {
        fp::raise(fp::Errc::no_labels, "unlabeled document in test split");
      }
      const auto ids =
          fp::doc_to_ids(doc, bundle.model.vocab, bundle.model.tokenizer);
      if (ids.empty()) continue;
      const auto x =
          fp::packet_vector(std::span<const fp::TokenId>(ids), bundle.model);
      const int y = fp::svm_predict(svm, x);
      pairs.emplace_back(doc.label == positive ? positive : negative,
                         y > 0 ? positive : negative);
    }
  }

  const auto report = fp::evaluate_predictions(pairs, labels);
  const std::string text = fp::render_text_report(report);

  std::ofstream out(args.report);
  if (!out) fp::raise(fp::Errc::io_failure, "cannot open " + args.report);
  out << text;
  out.close();
  std::ofstream csv(args.report + ".csv");
  if (!csv) {
    fp::raise(fp::Errc::io_failure, "cannot open " + args.report + ".csv");
  }
  csv << fp::render_csv_report(report);

  std::cout << text;
  return 0;
}

int run_export(const ExportArgs& args) {
  const auto bundle = fp::load_model_file(args.model);
  fp::export_vectors_file(bundle.model, fp::vec_scope_from_name(args.scope),
                          args.out);
  std::cerr << "wrote " << args.out << "\n";
  return 0;
}

void add_hyper_flags(CLI::App* cmd, HyperArgs& args, double default_lr) {
  args.lr = default_lr;
  cmd->add_option("--corpus", args.corpus, "corpus text file")
      ->required();
  cmd->add_option("--dim", args.dim, "embedding dimension");
  cmd->add_option("--lr", args.lr, "initial learning rate");
  cmd->add_option("--epochs", args.epochs, "training epochs");
  cmd->add_option("--minn", args.minn, "shortest char n-gram");
  cmd->add_option("--maxn", args.maxn, "longest char n-gram");
  cmd->add_option("--buckets", args.buckets, "hashed n-gram buckets");
  cmd->add_option("--negatives", args.negatives, "negative samples per pair");
  cmd->add_option("--window", args.window, "max context window half-width");
  cmd->add_option("--seed", args.seed, "rng seed");
  cmd->add_option("--threads", args.threads, "worker threads");
  cmd->add_option("--out", args.out, "output model path")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"packet embedding and detection toolkit"};
  app.require_subcommand(1);

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand(
      "ingest", "pcap + flow labels -> hex word corpus");
  ingest->add_option("--pcap", ingest_args.pcaps, "pcap file(s)")
      ->required();
  ingest->add_option("--labels", ingest_args.labels_csv,
                     "flow label csv (omit for an unlabeled corpus)");
  ingest->add_option("--slice", ingest_args.slice,
                     "byte slice: full, ip or payload");
  ingest->add_option("--word-bytes", ingest_args.word_bytes,
                     "bytes per hex word");
  ingest->add_option("--max-bytes", ingest_args.max_bytes,
                     "truncate packets to this many bytes");
  ingest->add_option("--day", ingest_args.days,
                     "day tag(s): one for all captures or one per capture");
  ingest->add_option("--default-label", ingest_args.default_label,
                     "label for packets no interval claims");
  ingest->add_option("--out", ingest_args.out, "corpus output path")
      ->required();

  HyperArgs pretrain_args;
  auto* pretrain = app.add_subcommand(
      "pretrain", "skip-gram pretraining on an (unlabeled) corpus");
  add_hyper_flags(pretrain, pretrain_args, 0.05);

  HyperArgs train_args;
  auto* train = app.add_subcommand(
      "train", "supervised classifier training on a labeled corpus");
  add_hyper_flags(train, train_args, 0.1);
  train->add_option("--pretrained", train_args.pretrained,
                    "text vectors to initialize matching input rows");

  PredictArgs predict_args;
  auto* predict = app.add_subcommand("predict",
                                     "label packets with a trained model");
  predict->add_option("--model", predict_args.model, "model file")
      ->required();
  predict->add_option("--corpus", predict_args.corpus, "corpus to label")
      ->required();
  predict->add_option("--k", predict_args.k, "labels per packet");
  predict->add_option("--out", predict_args.out, "prediction output path")
      ->required();

  EvaluateArgs evaluate_args;
  auto* evaluate = app.add_subcommand(
      "evaluate", "split, train on the train side, report held-out metrics");
  evaluate->add_option("--model", evaluate_args.model, "model file")
      ->required();
  evaluate->add_option("--corpus", evaluate_args.corpus, "labeled corpus")
      ->required();
  evaluate->add_option("--svm", evaluate_args.svm_positive,
                       "binary SVM path: positive label vs rest");
  evaluate->add_option("--split", evaluate_args.split,
                       "by-day or stratified")
      ->check(CLI::IsMember({"by-day", "stratified"}));
  evaluate->add_option("--train-days", evaluate_args.train_days,
                       "comma-separated train days (by-day)");
  evaluate->add_option("--test-days", evaluate_args.test_days,
                       "comma-separated test days (by-day)");
  evaluate->add_option("--fraction", evaluate_args.fraction,
                       "train fraction (stratified)");
  evaluate->add_option("--seed", evaluate_args.seed, "split / svm seed");
  evaluate->add_option("--lambda", evaluate_args.lambda,
                       "svm regularization");
  evaluate->add_option("--svm-epochs", evaluate_args.svm_epochs,
                       "svm training epochs");
  evaluate->add_option("--report", evaluate_args.report, "report path")
      ->required();

  ExportArgs export_args;
  auto* exporter = app.add_subcommand("export-vecs",
                                      "write embeddings as text vectors");
  exporter->add_option("--model", export_args.model, "model file")
      ->required();
  exporter->add_option("--scope", export_args.scope, "words or full")
      ->check(CLI::IsMember({"words", "full"}));
  exporter->add_option("--out", export_args.out, "vector output path")
      ->required();

  try {
    app.parse(argc, argv);
    if (ingest->parsed()) return run_ingest(ingest_args);
    if (pretrain->parsed()) return run_pretrain(pretrain_args);
    if (train->parsed()) return run_train(train_args);
    if (predict->parsed()) return run_predict(predict_args);
    if (evaluate->parsed()) return run_evaluate(evaluate_args);
    if (exporter->parsed()) return run_export(export_args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const fp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return fp::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
