#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "fastpacket/error.hpp"
#include "fastpacket/rng.hpp"
#include "fastpacket/tokenizer.hpp"

namespace fastpacket {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic,
                              Eigen::RowMajor>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class ModelMode { supervised, skipgram };

struct ModelConfig {
  int dim = 64;
  double lr0 = 0.1;  // 0.05 is the usual starting point for skipgram
  int epochs = 5;
  int negatives = 5;  // skipgram only
  int window = 5;     // skipgram only
  std::uint64_t seed = 1;
  int threads = 1;
  ModelMode mode = ModelMode::supervised;

  void validate() const {
    if (dim < 1) raise(Errc::bad_config, "dim must be >= 1");
    if (!(lr0 > 0)) raise(Errc::bad_config, "lr0 must be > 0");
    if (epochs < 1) raise(Errc::bad_config, "epochs must be >= 1");
    if (negatives < 1) raise(Errc::bad_config, "negatives must be >= 1");
    if (window < 1) raise(Errc::bad_config, "window must be >= 1");
    if (threads < 1) raise(Errc::bad_config, "threads must be >= 1");
  }
};

// Input matrix over (V + B) rows of word/bucket vectors plus the output
// matrix (label rows when supervised, context-word rows when skipgram).
template <typename Scalar>
struct EmbeddingModelT {
  ModelConfig config;
  TokenizerConfig tokenizer;
  Vocabulary vocab;
  MatrixX<Scalar> input;   // (V + B) x dim
  MatrixX<Scalar> output;  // K x dim or V x dim
  std::vector<std::string> labels;  // supervised only; order fixes rows

  bool supervised() const { return config.mode == ModelMode::supervised; }
  Eigen::Index dim() const { return input.cols(); }
};

using EmbeddingModel = EmbeddingModelT<float>;

// Input rows are i.i.d. uniform in [-1/dim, +1/dim], filled row-major from
// the seeded generator; output rows start at zero. Bit-identical for a
// fixed (config, vocab, seed).
template <typename Scalar>
EmbeddingModelT<Scalar> init_model(const ModelConfig& cfg, Vocabulary vocab,
                                   TokenizerConfig tokenizer,
                                   std::vector<std::string> labels = {}) {
  cfg.validate();
  tokenizer.validate();
  if (cfg.mode == ModelMode::supervised) {
    if (labels.empty()) {
      raise(Errc::no_labels, "supervised model needs at least one label");
    }
    std::unordered_set<std::string_view> seen;
    for (const auto& label : labels) {
      if (!seen.insert(label).second) {
        raise(Errc::bad_config, "duplicate label: " + label);
      }
    }
  }

  EmbeddingModelT<Scalar> model;
  model.config = cfg;
  model.tokenizer = std::move(tokenizer);
  model.vocab = std::move(vocab);
  model.labels = std::move(labels);

  const auto rows = static_cast<Eigen::Index>(model.vocab.row_count());
  model.input.resize(rows, cfg.dim);
  const double bound = 1.0 / static_cast<double>(cfg.dim);
  Rng rng(cfg.seed);
  for (Eigen::Index r = 0; r < model.input.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.input.cols(); ++c) {
      model.input(r, c) = static_cast<Scalar>(rng.uniform(-bound, bound));
    }
  }

  const auto out_rows =
      cfg.mode == ModelMode::supervised
          ? static_cast<Eigen::Index>(model.labels.size())
          : static_cast<Eigen::Index>(model.vocab.size());
  model.output = MatrixX<Scalar>::Zero(out_rows, cfg.dim);
  return model;
}

// Sum of the selected rows in ascending-id order. Fixing the summation order
// makes bag composition bitwise permutation-invariant.
template <typename Scalar>
VectorX<Scalar> row_sum_sorted(const MatrixX<Scalar>& m,
                               std::span<const TokenId> ids) {
  std::vector<TokenId> sorted(ids.begin(), ids.end());
  std::sort(sorted.begin(), sorted.end());
  VectorX<Scalar> sum = VectorX<Scalar>::Zero(m.cols());
  for (const TokenId id : sorted) {
    sum += m.row(static_cast<Eigen::Index>(id)).transpose();
  }
  return sum;
}

// Arithmetic mean of the input rows selected by ids (bag of ids).
template <typename Scalar>
VectorX<Scalar> packet_vector(std::span<const TokenId> ids,
                              const EmbeddingModelT<Scalar>& model) {
  if (ids.empty()) {
    raise(Errc::empty_document, "cannot embed an empty document");
  }
  VectorX<Scalar> h = row_sum_sorted(model.input, ids);
  h /= static_cast<Scalar>(ids.size());
  return h;
}

template <typename Scalar>
VectorX<Scalar> softmax(const VectorX<Scalar>& logits) {
  const Scalar max = logits.maxCoeff();
  VectorX<Scalar> p = (logits.array() - max).exp();
  p /= p.sum();
  return p;
}

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  if (x >= 0) {
    return Scalar(1) / (Scalar(1) + std::exp(-x));
  }
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

// ln sigmoid(x), stable for large |x|.
template <typename Scalar>
Scalar log_sigmoid(Scalar x) {
  if (x >= 0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

// One SGD step of the full-softmax classifier on a bag of ids. Gradients are
// evaluated at the pre-update point; the input-row gradient carries the 1/n
// of the mean composition. Returns the pre-update loss -ln p[label].
template <typename Scalar>
Scalar supervised_step(EmbeddingModelT<Scalar>& model,
                       std::span<const TokenId> ids, int label_idx,
                       Scalar lr) {
  const VectorX<Scalar> h = packet_vector(ids, model);
  VectorX<Scalar> grad_logits = softmax<Scalar>(model.output * h);
  const Scalar loss = -std::log(std::max(grad_logits[label_idx],
                                         std::numeric_limits<Scalar>::min()));
  grad_logits[label_idx] -= Scalar(1);

  const VectorX<Scalar> grad_h = model.output.transpose() * grad_logits;
  model.output.noalias() -= lr * grad_logits * h.transpose();
  const Scalar scale = lr / static_cast<Scalar>(ids.size());
  for (const TokenId id : ids) {
    model.input.row(static_cast<Eigen::Index>(id)) -=
        scale * grad_h.transpose();
  }
  return loss;
}

// One negative-sampling step. The center composition is a SUM of input rows,
// so the input gradient is applied undivided to every contributing row.
// All scores and gradients are evaluated at the pre-update point; returns
// the pre-update loss -ln s(s_ctx) - sum_n ln s(-s_n).
template <typename Scalar>
Scalar skipgram_step(EmbeddingModelT<Scalar>& model,
                     std::span<const TokenId> center_ids, TokenId context_word,
                     std::span<const TokenId> negatives, Scalar lr) {
  const VectorX<Scalar> h = row_sum_sorted(model.input, center_ids);
  VectorX<Scalar> grad_h = VectorX<Scalar>::Zero(model.input.cols());
  Scalar loss = 0;

  // (output row, dloss/dscore) pairs, gradients at the pre-update point
  std::vector<std::pair<TokenId, Scalar>> row_grads;
  row_grads.reserve(negatives.size() + 1);
  const auto accumulate = [&](TokenId row, Scalar target) {
    const auto r = static_cast<Eigen::Index>(row);
    const Scalar score = model.output.row(r).dot(h);
    loss += target > Scalar(0.5) ? -log_sigmoid(score) : -log_sigmoid(-score);
    const Scalar g = sigmoid(score) - target;
    grad_h += g * model.output.row(r).transpose();
    row_grads.emplace_back(row, g);
  };
  accumulate(context_word, Scalar(1));
  for (const TokenId negative : negatives) accumulate(negative, Scalar(0));

  for (const auto& [row, g] : row_grads) {
    model.output.row(static_cast<Eigen::Index>(row)) -=
        lr * g * h.transpose();
  }
  for (const TokenId id : center_ids) {
    model.input.row(static_cast<Eigen::Index>(id)) -= lr * grad_h.transpose();
  }
  return loss;
}

// Top-k labels by softmax probability, descending; ties break toward the
// earlier label row.
template <typename Scalar>
std::vector<std::pair<std::string, Scalar>> predict(
    const EmbeddingModelT<Scalar>& model, std::span<const TokenId> ids,
    int k) {
  if (!model.supervised()) {
    raise(Errc::not_supervised, "predict needs a supervised model");
  }
  if (ids.empty()) {
    raise(Errc::empty_document, "cannot predict an empty document");
  }
  const VectorX<Scalar> h = packet_vector(ids, model);
  const VectorX<Scalar> p = softmax<Scalar>(model.output * h);

  std::vector<int> order(static_cast<std::size_t>(p.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return p[a] > p[b]; });

  const auto take = std::min<std::size_t>(order.size(),
                                          static_cast<std::size_t>(
                                              std::max(k, 0)));
  std::vector<std::pair<std::string, Scalar>> result;
  result.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    result.emplace_back(model.labels[static_cast<std::size_t>(order[i])],
                        p[order[i]]);
  }
  return result;
}

// V x dim matrix of composed word vectors: word row plus its n-gram rows,
// summed (the skipgram composition).
template <typename Scalar>
MatrixX<Scalar> composed_word_matrix(const EmbeddingModelT<Scalar>& model) {
  MatrixX<Scalar> composed(static_cast<Eigen::Index>(model.vocab.size()),
                           model.dim());
  for (std::size_t w = 0; w < model.vocab.size(); ++w) {
    const auto ids =
        word_input_ids(model.vocab.word(w), model.vocab, model.tokenizer);
    composed.row(static_cast<Eigen::Index>(w)) =
        row_sum_sorted(model.input, ids).transpose();
  }
  return composed;
}

template <typename Scalar>
Scalar cosine_similarity(const VectorX<Scalar>& a, const VectorX<Scalar>& b) {
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == Scalar(0) || nb == Scalar(0)) return Scalar(0);
  return a.dot(b) / (na * nb);
}

// Top-k vocabulary words by cosine similarity of composed vectors,
// excluding the query word itself.
template <typename Scalar>
std::vector<std::pair<std::string, Scalar>> nearest_neighbors(
    const EmbeddingModelT<Scalar>& model, std::string_view word, int k) {
  const std::int64_t query_id = model.vocab.word_id(word);
  if (query_id < 0) {
    raise(Errc::out_of_vocabulary,
          "word not in vocabulary: " + std::string(word));
  }
  const MatrixX<Scalar> composed = composed_word_matrix(model);
  const VectorX<Scalar> query =
      composed.row(static_cast<Eigen::Index>(query_id)).transpose();

  std::vector<std::pair<int, Scalar>> scored;
  scored.reserve(model.vocab.size());
  for (std::size_t w = 0; w < model.vocab.size(); ++w) {
    if (static_cast<std::int64_t>(w) == query_id) continue;
    const VectorX<Scalar> row =
        composed.row(static_cast<Eigen::Index>(w)).transpose();
    scored.emplace_back(static_cast<int>(w), cosine_similarity(query, row));
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) {
                     return a.second > b.second;
                   });

  const auto take =
      std::min<std::size_t>(scored.size(),
                            static_cast<std::size_t>(std::max(k, 0)));
  std::vector<std::pair<std::string, Scalar>> result;
  result.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    result.emplace_back(model.vocab.word(scored[i].first), scored[i].second);
  }
  return result;
}

}  // namespace fastpacket
