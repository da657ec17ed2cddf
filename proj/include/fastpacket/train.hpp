#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fastpacket/error.hpp"
#include "fastpacket/model.hpp"
#include "fastpacket/rng.hpp"
#include "fastpacket/sampling.hpp"
#include "fastpacket/tokenizer.hpp"

namespace fastpacket {

struct TrainReport {
  std::vector<double> epoch_mean_loss;
  std::uint64_t tokens_processed = 0;
  std::uint64_t documents_skipped = 0;  // yielded no input ids
  double wall_seconds = 0.0;
};

struct SupervisedExample {
  std::vector<TokenId> ids;
  std::int32_t label = 0;     // row in model.output
  std::uint32_t tokens = 0;   // word count, drives the lr schedule
};

// Labels in first-seen corpus order; the order fixes output rows.
inline std::vector<std::string> collect_labels(
    const std::vector<HexDocument>& corpus) {
  std::vector<std::string> labels;
  std::unordered_map<std::string, std::size_t> seen;
  for (const auto& doc : corpus) {
    if (doc.label.empty()) continue;
    if (seen.emplace(doc.label, labels.size()).second) {
      labels.push_back(doc.label);
    }
  }
  return labels;
}

inline std::vector<SupervisedExample> corpus_to_examples(
    const std::vector<HexDocument>& corpus, const Vocabulary& vocab,
    const TokenizerConfig& tokenizer, const std::vector<std::string>& labels,
    std::uint64_t* skipped = nullptr) {
  std::unordered_map<std::string_view, std::int32_t> label_index;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    label_index.emplace(labels[i], static_cast<std::int32_t>(i));
  }

  std::vector<SupervisedExample> examples;
  examples.reserve(corpus.size());
  std::uint64_t skip_count = 0;
  for (const auto& doc : corpus) {
    if (doc.label.empty()) {
      raise(Errc::no_labels,
            "unlabeled document in supervised corpus: " + doc.origin.file);
    }
    const auto it = label_index.find(doc.label);
    if (it == label_index.end()) {
      raise(Errc::unknown_label, "label not in label set: " + doc.label);
    }
    SupervisedExample ex;
    ex.ids = doc_to_ids(doc, vocab, tokenizer);
    if (ex.ids.empty()) {
      ++skip_count;
      continue;
    }
    ex.label = it->second;
    ex.tokens = static_cast<std::uint32_t>(doc.words.size());
    examples.push_back(std::move(ex));
  }
  if (skipped != nullptr) *skipped = skip_count;
  return examples;
}

struct SkipgramToken {
  TokenId word = 0;  // vocabulary id, also the output row
  std::vector<TokenId> input_ids;
};
using SkipgramDocument = std::vector<SkipgramToken>;

// Words below min_count have no vocabulary id and are dropped from the
// token sequence, the usual skipgram treatment.
inline std::vector<SkipgramDocument> corpus_to_skipgram(
    const std::vector<HexDocument>& corpus, const Vocabulary& vocab,
    const TokenizerConfig& tokenizer) {
  std::vector<SkipgramDocument> docs;
  docs.reserve(corpus.size());
  for (const auto& doc : corpus) {
    SkipgramDocument tokens;
    tokens.reserve(doc.words.size());
    for (const auto& word : doc.words) {
      const std::int64_t id = vocab.word_id(word);
      if (id < 0) continue;
      SkipgramToken token;
      token.word = static_cast<TokenId>(id);
      token.input_ids = word_input_ids(word, vocab, tokenizer);
      tokens.push_back(std::move(token));
    }
    docs.push_back(std::move(tokens));
  }
  return docs;
}

namespace detail {

struct LrSchedule {
  double lr0;
  std::uint64_t total_tokens;  // epochs x tokens per epoch

  double at(std::uint64_t progress) const {
    if (total_tokens == 0) return lr0;
    const double fraction =
        1.0 - static_cast<double>(progress) / static_cast<double>(total_tokens);
    return lr0 * std::max(0.0, fraction);
  }
};

// [lo, hi) context positions around center i for half-width b in a document
// of n tokens; the center itself is skipped by the caller.
inline std::pair<std::size_t, std::size_t> window_bounds(std::size_t i,
                                                         std::size_t b,
                                                         std::size_t n) {
  return {i > b ? i - b : 0, std::min(n, i + b + 1)};
}

// [begin, end) index range of shard t when n items are split across T
// contiguous chunks.
inline std::pair<std::size_t, std::size_t> shard_range(std::size_t n, int T,
                                                       int t) {
  const std::size_t chunk = (n + static_cast<std::size_t>(T) - 1) /
                            static_cast<std::size_t>(T);
  const std::size_t begin = std::min(n, chunk * static_cast<std::size_t>(t));
  const std::size_t end = std::min(n, begin + chunk);
  return {begin, end};
}

}  // namespace detail

// SGD over the examples in corpus order, one full-softmax step per example.
// threads == 1 is fully deterministic; threads > 1 shards the examples and
// updates the shared matrices lock-free, so exact results vary run to run.
template <typename Scalar>
TrainReport train_supervised(EmbeddingModelT<Scalar>& model,
                             const std::vector<SupervisedExample>& examples) {
  if (!model.supervised()) {
    raise(Errc::not_supervised, "model mode is not supervised");
  }
  if (examples.empty()) {
    raise(Errc::empty_corpus, "no usable training examples");
  }
  const auto label_rows = static_cast<std::int32_t>(model.output.rows());
  std::uint64_t tokens_per_epoch = 0;
  for (const auto& ex : examples) {
    if (ex.label < 0 || ex.label >= label_rows) {
      raise(Errc::unknown_label, "label row out of range");
    }
    tokens_per_epoch += ex.tokens;
  }

  const auto start = std::chrono::steady_clock::now();
  const ModelConfig& cfg = model.config;
  const detail::LrSchedule schedule{
      cfg.lr0, tokens_per_epoch * static_cast<std::uint64_t>(cfg.epochs)};
  std::atomic<std::uint64_t> progress{0};

  TrainReport report;
  report.epoch_mean_loss.reserve(static_cast<std::size_t>(cfg.epochs));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<double> shard_loss(static_cast<std::size_t>(cfg.threads), 0.0);
    std::vector<std::uint64_t> shard_steps(
        static_cast<std::size_t>(cfg.threads), 0);

    const auto worker = [&](int t) {
      const auto [begin, end] =
          detail::shard_range(examples.size(), cfg.threads, t);
      double loss = 0.0;
      std::uint64_t steps = 0;
      for (std::size_t i = begin; i < end; ++i) {
        const auto& ex = examples[i];
        const auto lr = static_cast<Scalar>(schedule.at(
            progress.load(std::memory_order_relaxed)));
        loss += static_cast<double>(
            supervised_step(model, std::span<const TokenId>(ex.ids),
                            ex.label, lr));
        ++steps;
        progress.fetch_add(ex.tokens, std::memory_order_relaxed);
      }
      shard_loss[static_cast<std::size_t>(t)] = loss;
      shard_steps[static_cast<std::size_t>(t)] = steps;
    };

    if (cfg.threads == 1) {
      worker(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(cfg.threads));
      for (int t = 0; t < cfg.threads; ++t) pool.emplace_back(worker, t);
      for (auto& th : pool) th.join();
    }

    double loss = 0.0;
    std::uint64_t steps = 0;
    for (int t = 0; t < cfg.threads; ++t) {
      loss += shard_loss[static_cast<std::size_t>(t)];
      steps += shard_steps[static_cast<std::size_t>(t)];
    }
    report.epoch_mean_loss.push_back(steps > 0 ? loss / static_cast<double>(
                                                            steps)
                                               : 0.0);
  }

  report.tokens_processed = progress.load();
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

// Skip-gram with negative sampling. For each position a window half-width b
// is drawn uniformly from [1, window]; each (center, context) pair inside it
// takes one step with cfg.negatives negatives drawn from count^0.75.
// Negatives colliding with the context word are redrawn, and dropped after
// 20 misses. Worker RNG streams derive from cfg.seed and persist across
// epochs, so threads == 1 is fully deterministic.
template <typename Scalar>
TrainReport train_unsupervised(EmbeddingModelT<Scalar>& model,
                               const std::vector<SkipgramDocument>& docs) {
  if (model.config.mode != ModelMode::skipgram) {
    raise(Errc::bad_config, "model mode is not skipgram");
  }
  std::uint64_t tokens_per_epoch = 0;
  for (const auto& doc : docs) tokens_per_epoch += doc.size();
  if (tokens_per_epoch == 0) {
    raise(Errc::empty_corpus, "no usable skipgram tokens");
  }

  const auto start = std::chrono::steady_clock::now();
  const ModelConfig& cfg = model.config;
  const NegativeSampler sampler(model.vocab);
  const detail::LrSchedule schedule{
      cfg.lr0, tokens_per_epoch * static_cast<std::uint64_t>(cfg.epochs)};
  std::atomic<std::uint64_t> progress{0};

  std::vector<Rng> rngs;
  rngs.reserve(static_cast<std::size_t>(cfg.threads));
  for (int t = 0; t < cfg.threads; ++t) {
    rngs.emplace_back(derive_seed(cfg.seed, static_cast<std::uint64_t>(t)));
  }

  TrainReport report;
  report.epoch_mean_loss.reserve(static_cast<std::size_t>(cfg.epochs));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<double> shard_loss(static_cast<std::size_t>(cfg.threads), 0.0);
    std::vector<std::uint64_t> shard_pairs(
        static_cast<std::size_t>(cfg.threads), 0);

    const auto worker = [&](int t) {
      Rng& rng = rngs[static_cast<std::size_t>(t)];
      const auto [begin, end] = detail::shard_range(docs.size(), cfg.threads,
                                                    t);
      double loss = 0.0;
      std::uint64_t pairs = 0;
      std::vector<TokenId> negatives;
      for (std::size_t d = begin; d < end; ++d) {
        const SkipgramDocument& doc = docs[d];
        const std::size_t n = doc.size();
        for (std::size_t i = 0; i < n; ++i) {
          const auto lr = static_cast<Scalar>(schedule.at(
              progress.load(std::memory_order_relaxed)));
          const auto b = static_cast<std::size_t>(rng.uniform_int(
              1, static_cast<std::uint64_t>(cfg.window)));
          const auto [lo, hi] = detail::window_bounds(i, b, n);
          for (std::size_t j = lo; j < hi; ++j) {
            if (j == i) continue;
            const TokenId context = doc[j].word;
            negatives.clear();
            for (int neg = 0; neg < cfg.negatives; ++neg) {
              for (int attempt = 0; attempt < 20; ++attempt) {
                const TokenId candidate = sampler.sample(rng);
                if (candidate != context) {
                  negatives.push_back(candidate);
                  break;
                }
              }
            }
            loss += static_cast<double>(skipgram_step(
                model, std::span<const TokenId>(doc[i].input_ids), context,
                std::span<const TokenId>(negatives), lr));
            ++pairs;
          }
          progress.fetch_add(1, std::memory_order_relaxed);
        }
      }
      shard_loss[static_cast<std::size_t>(t)] = loss;
      shard_pairs[static_cast<std::size_t>(t)] = pairs;
    };

    if (cfg.threads == 1) {
      worker(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(cfg.threads));
      for (int t = 0; t < cfg.threads; ++t) pool.emplace_back(worker, t);
      for (auto& th : pool) th.join();
    }

    double loss = 0.0;
    std::uint64_t pairs = 0;
    for (int t = 0; t < cfg.threads; ++t) {
      loss += shard_loss[static_cast<std::size_t>(t)];
      pairs += shard_pairs[static_cast<std::size_t>(t)];
    }
    report.epoch_mean_loss.push_back(
        pairs > 0 ? loss / static_cast<double>(pairs) : 0.0);
  }

  report.tokens_processed = progress.load();
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

// Builds vocabulary, label set and model from a labeled corpus, then trains.
template <typename Scalar = float>
std::pair<EmbeddingModelT<Scalar>, TrainReport> train_supervised_corpus(
    const std::vector<HexDocument>& corpus, ModelConfig cfg,
    const TokenizerConfig& tokenizer) {
  cfg.mode = ModelMode::supervised;
  const Vocabulary vocab = Vocabulary::build(corpus, tokenizer);
  auto model = init_model<Scalar>(cfg, vocab, tokenizer,
                                  collect_labels(corpus));
  TrainReport report;
  const auto examples =
      corpus_to_examples(corpus, model.vocab, model.tokenizer, model.labels,
                         &report.documents_skipped);
  const TrainReport inner = train_supervised(model, examples);
  report.epoch_mean_loss = inner.epoch_mean_loss;
  report.tokens_processed = inner.tokens_processed;
  report.wall_seconds = inner.wall_seconds;
  return {std::move(model), std::move(report)};
}

template <typename Scalar = float>
std::pair<EmbeddingModelT<Scalar>, TrainReport> train_skipgram_corpus(
    const std::vector<HexDocument>& corpus, ModelConfig cfg,
    const TokenizerConfig& tokenizer) {
  cfg.mode = ModelMode::skipgram;
  const Vocabulary vocab = Vocabulary::build(corpus, tokenizer);
  auto model = init_model<Scalar>(cfg, vocab, tokenizer);
  const auto docs = corpus_to_skipgram(corpus, model.vocab, model.tokenizer);
  TrainReport report = train_unsupervised(model, docs);
  return {std::move(model), std::move(report)};
}

}  // namespace fastpacket
