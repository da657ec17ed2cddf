#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "fastpacket/error.hpp"
#include "fastpacket/model.hpp"
#include "fastpacket/rng.hpp"
#include "fastpacket/tokenizer.hpp"

namespace fastpacket {

template <typename Scalar>
struct VectorDatasetT {
  MatrixX<Scalar> x;        // n x dim
  std::vector<int> y;       // +1 / -1 per row
};

using VectorDataset = VectorDatasetT<float>;

template <typename Scalar>
struct SvmModelT {
  VectorX<Scalar> w;
  Scalar bias = 0;
  Scalar lambda = 0;
};

using SvmModel = SvmModelT<double>;

template <typename Scalar>
Scalar svm_score(const SvmModelT<Scalar>& model, const VectorX<Scalar>& x) {
  if (x.size() != model.w.size()) {
    raise(Errc::dim_mismatch, "svm input dimension mismatch");
  }
  return model.w.dot(x) + model.bias;
}

// Sign convention: a score of exactly zero predicts +1.
template <typename Scalar>
int svm_predict(const SvmModelT<Scalar>& model, const VectorX<Scalar>& x) {
  return svm_score(model, x) >= Scalar(0) ? +1 : -1;
}

// One Pegasos update at step t (1-based): eta = 1/(lambda t); on a margin
// violation both w and the unregularized bias move, otherwise w only
// shrinks; w is then projected onto the ball of radius 1/sqrt(lambda).
template <typename Scalar>
void pegasos_step(SvmModelT<Scalar>& model, const VectorX<Scalar>& x, int y,
                  std::uint64_t t) {
  const Scalar lambda = model.lambda;
  const Scalar eta = Scalar(1) / (lambda * static_cast<Scalar>(t));
  const Scalar margin = static_cast<Scalar>(y) * svm_score(model, x);

  model.w *= (Scalar(1) - eta * lambda);
  if (margin < Scalar(1)) {
    model.w += (eta * static_cast<Scalar>(y)) * x;
    model.bias += eta * static_cast<Scalar>(y);
  }

  const Scalar norm = model.w.norm();
  const Scalar radius = Scalar(1) / std::sqrt(lambda);
  if (norm > radius) model.w *= radius / norm;
}

// Pegasos over epochs passes, visiting rows in a fresh random order each
// epoch; t keeps counting across epochs.
template <typename Scalar>
SvmModelT<Scalar> pegasos_train(const VectorDatasetT<Scalar>& data,
                                Scalar lambda, int epochs,
                                std::uint64_t seed) {
  if (data.x.rows() == 0) {
    raise(Errc::empty_dataset, "svm training set is empty");
  }
  if (!(lambda > Scalar(0))) {
    raise(Errc::nonpositive_lambda, "lambda must be > 0");
  }
  if (static_cast<std::size_t>(data.x.rows()) != data.y.size()) {
    raise(Errc::bad_config, "svm row/label count mismatch");
  }
  for (const int y : data.y) {
    if (y != 1 && y != -1) raise(Errc::bad_config, "svm labels must be +-1");
  }
  if (epochs < 1) raise(Errc::bad_config, "epochs must be >= 1");

  SvmModelT<Scalar> model;
  model.w = VectorX<Scalar>::Zero(data.x.cols());
  model.lambda = lambda;

  Rng rng(seed);
  std::vector<std::size_t> order(static_cast<std::size_t>(data.x.rows()));
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::uint64_t t = 1;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    // Fisher-Yates
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(
                                  rng.below(i))]);
    }
    for (const std::size_t row : order) {
      const VectorX<Scalar> x =
          data.x.row(static_cast<Eigen::Index>(row)).transpose();
      pegasos_step(model, x, data.y[row], t);
      ++t;
    }
  }
  return model;
}

// Embeds every labeled document with the (frozen) embedding model and tags
// it +1 when its label equals positive_label, -1 otherwise. Documents that
// produce no input ids are dropped; *skipped reports how many.
template <typename Scalar>
VectorDatasetT<Scalar> embed_dataset(const EmbeddingModelT<Scalar>& model,
                                     const std::vector<HexDocument>& docs,
                                     const std::string& positive_label,
                                     std::uint64_t* skipped = nullptr) {
  std::vector<VectorX<Scalar>> rows;
  std::vector<int> ys;
  rows.reserve(docs.size());
  ys.reserve(docs.size());
  std::uint64_t skip_count = 0;
  for (const auto& doc : docs) {
    if (doc.label.empty()) {
      raise(Errc::no_labels,
            "unlabeled document in svm corpus: " + doc.origin.file);
    }
    const auto ids = doc_to_ids(doc, model.vocab, model.tokenizer);
    if (ids.empty()) {
      ++skip_count;
      continue;
    }
    rows.push_back(packet_vector(std::span<const TokenId>(ids), model));
    ys.push_back(doc.label == positive_label ? +1 : -1);
  }
  if (skipped != nullptr) *skipped = skip_count;

  VectorDatasetT<Scalar> data;
  data.x.resize(static_cast<Eigen::Index>(rows.size()), model.dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    data.x.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  data.y = std::move(ys);
  return data;
}

// One-vs-rest reduction for more than two classes: one Pegasos machine per
// label, prediction by highest raw score (ties toward the earlier label).
template <typename Scalar>
struct OneVsRestT {
  std::vector<std::string> labels;
  std::vector<SvmModelT<Scalar>> machines;
};

template <typename Scalar>
OneVsRestT<Scalar> train_one_vs_rest(const MatrixX<Scalar>& x,
                                     const std::vector<std::string>& y,
                                     const std::vector<std::string>& labels,
                                     Scalar lambda, int epochs,
                                     std::uint64_t seed) {
  if (x.rows() == 0) raise(Errc::empty_dataset, "svm training set is empty");
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    raise(Errc::bad_config, "svm row/label count mismatch");
  }
  OneVsRestT<Scalar> ovr;
  ovr.labels = labels;
  ovr.machines.reserve(labels.size());
  for (std::size_t k = 0; k < labels.size(); ++k) {
    VectorDatasetT<Scalar> data;
    data.x = x;
    data.y.reserve(y.size());
    for (const auto& label : y) {
      data.y.push_back(label == labels[k] ? +1 : -1);
    }
    ovr.machines.push_back(
        pegasos_train(data, lambda, epochs, derive_seed(seed, k)));
  }
  return ovr;
}

template <typename Scalar>
std::string one_vs_rest_predict(const OneVsRestT<Scalar>& ovr,
                                const VectorX<Scalar>& x) {
  if (ovr.machines.empty()) raise(Errc::empty_dataset, "no machines trained");
  std::size_t best = 0;
  Scalar best_score = svm_score(ovr.machines[0], x);
  for (std::size_t k = 1; k < ovr.machines.size(); ++k) {
    const Scalar score = svm_score(ovr.machines[k], x);
    if (score > best_score) {
      best = k;
      best_score = score;
    }
  }
  return ovr.labels[best];
}

}  // namespace fastpacket
