#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "fastpacket/error.hpp"
#include "fastpacket/rng.hpp"
#include "fastpacket/tokenizer.hpp"

namespace fastpacket {

// Draws word ids with probability proportional to count^power via a Walker
// alias table: O(V) setup, O(1) per draw, probabilities exact to double
// rounding. Safe to share across threads; each caller brings its own Rng.
class NegativeSampler {
 public:
  NegativeSampler() = default;

  explicit NegativeSampler(const Vocabulary& vocab, double power = 0.75) {
    const std::size_t n = vocab.size();
    if (n == 0) raise(Errc::empty_corpus, "cannot sample from empty vocab");

    probability_.resize(n);
    double total = 0.0;
    for (std::size_t w = 0; w < n; ++w) {
      probability_[w] = std::pow(static_cast<double>(vocab.count(w)), power);
      total += probability_[w];
    }
    for (double& p : probability_) p /= total;
    build_alias();
  }

  TokenId sample(Rng& rng) const {
    const auto slot = static_cast<std::size_t>(rng.below(threshold_.size()));
    return rng.next_real() < threshold_[slot]
               ? static_cast<TokenId>(slot)
               : alias_[slot];
  }

  // Exact sampling distribution, indexed by word id.
  const std::vector<double>& probabilities() const { return probability_; }

  std::size_t size() const { return probability_.size(); }

 private:
  void build_alias() {
    const std::size_t n = probability_.size();
    threshold_.assign(n, 1.0);
    alias_.assign(n, 0);

    std::vector<double> scaled(n);
    std::vector<std::size_t> small;
    std::vector<std::size_t> large;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = probability_[i] * static_cast<double>(n);
      (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
      const std::size_t s = small.back();
      small.pop_back();
      const std::size_t l = large.back();
      large.pop_back();
      threshold_[s] = scaled[s];
      alias_[s] = static_cast<TokenId>(l);
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    // leftovers are 1.0 up to rounding; keep threshold 1 so alias is unused
  }

  std::vector<double> probability_;
  std::vector<double> threshold_;
  std::vector<TokenId> alias_;
};

}  // namespace fastpacket
