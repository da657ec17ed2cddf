#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fastpacket {

using TokenId = std::uint32_t;

struct TokenizerConfig {
  unsigned word_bytes = 2;      // bytes per hex word
  unsigned minn = 2;            // char-n-gram length range over "<word>"
  unsigned maxn = 4;
  std::uint64_t buckets = 2'000'000;  // hashed n-gram bucket count
  std::uint64_t min_count = 1;        // vocabulary frequency floor
  std::size_t max_packet_bytes = 1500;  // truncation cap before encoding

  void validate() const;  // throws bad_config
};

struct DocOrigin {
  std::string file;
  std::uint64_t packet_index = 0;
};

// One packet rendered as an ordered sequence of fixed-width lowercase hex
// words. label/day are empty when absent.
struct HexDocument {
  std::vector<std::string> words;
  std::string label;
  DocOrigin origin;
  std::string day;
};

std::string hex_encode(std::span<const std::uint8_t> data);
std::vector<std::uint8_t> hex_decode(std::string_view hex);  // inverse

// Non-overlapping chunks of 2*word_bytes hex chars; a shorter trailing chunk
// is kept as a final word. Throws odd_length_hex.
std::vector<std::string> words_from_hex(std::string_view hex,
                                        unsigned word_bytes);

// All contiguous substrings of "<word>" with length in [minn, maxn],
// enumerated by start position (left to right), shortest first at each
// position. Duplicates kept.
std::vector<std::string> char_ngrams(std::string_view word, unsigned minn,
                                     unsigned maxn);

// FNV-1a, 32-bit: h = 2166136261; per byte h = (h ^ byte) * 16777619.
std::uint32_t fnv1a32(std::span<const std::uint8_t> data);
std::uint32_t fnv1a32(std::string_view s);

// Word -> dense id map plus the hashed n-gram bucket space appended after the
// word ids. Immutable once built.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Counts words, drops those under min_count and orders by
  // (count desc, word asc). Throws empty_corpus when no words survive.
  static Vocabulary build(const std::vector<HexDocument>& corpus,
                          const TokenizerConfig& cfg);

  // Reassembles a vocabulary from (word, count) rows already in id order,
  // used by model deserialization.
  static Vocabulary from_rows(
      std::vector<std::pair<std::string, std::uint64_t>> rows,
      std::uint64_t buckets);

  std::size_t size() const { return words_.size(); }        // V
  std::uint64_t bucket_count() const { return buckets_; }   // B
  std::size_t row_count() const { return size() + buckets_; }

  // Dense id in [0, V), or -1 when the word is out of vocabulary.
  std::int64_t word_id(std::string_view word) const;

  const std::string& word(std::size_t id) const { return words_[id].first; }
  std::uint64_t count(std::size_t id) const { return words_[id].second; }

  // Bucket id in [V, V+B): V + fnv1a32(ngram) mod B.
  TokenId ngram_id(std::string_view ngram) const;

 private:
  struct TransparentHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::vector<std::pair<std::string, std::uint64_t>> words_;
  std::unordered_map<std::string, TokenId, TransparentHash, std::equal_to<>>
      index_;
  std::uint64_t buckets_ = 0;
};

// Vocab id (when present) followed by the n-gram bucket ids, per word.
std::vector<TokenId> word_input_ids(std::string_view word,
                                    const Vocabulary& vocab,
                                    const TokenizerConfig& cfg);
std::vector<TokenId> doc_to_ids(const HexDocument& doc,
                                const Vocabulary& vocab,
                                const TokenizerConfig& cfg);

// Truncates, hex-encodes and chunks one packet's bytes into a document.
HexDocument make_document(std::span<const std::uint8_t> bytes,
                          const TokenizerConfig& cfg, std::string label = {},
                          DocOrigin origin = {}, std::string day = {});

// "__label__<label> w1 w2 ..." (label token omitted for unlabeled docs).
// Throws label_whitespace when the label contains whitespace.
std::string emit_corpus_record(const HexDocument& doc);
HexDocument parse_corpus_record(std::string_view line);

}  // namespace fastpacket
