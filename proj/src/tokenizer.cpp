#include "fastpacket/tokenizer.hpp"

#include <algorithm>
#include <cctype>

#include "fastpacket/error.hpp"

namespace fastpacket {
namespace {

constexpr char kHexDigits[] = "0123456789abcdef";
constexpr std::string_view kLabelPrefix = "__label__";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

void TokenizerConfig::validate() const {
  if (word_bytes < 1 || word_bytes > 8) {
    raise(Errc::bad_config, "word_bytes must be in [1, 8]");
  }
  if (minn < 1 || minn > maxn || maxn > 2 * word_bytes + 2) {
    raise(Errc::bad_config,
          "n-gram range must satisfy 1 <= minn <= maxn <= 2*word_bytes + 2");
  }
  if (buckets < 1) {
    raise(Errc::bad_config, "buckets must be >= 1");
  }
}

std::string hex_encode(std::span<const std::uint8_t> data) {
  std::string out;
  out.resize(data.size() * 2);
  for (std::size_t i = 0; i < data.size(); ++i) {
    out[2 * i] = kHexDigits[data[i] >> 4];
    out[2 * i + 1] = kHexDigits[data[i] & 0x0F];
  }
  return out;
}

std::vector<std::uint8_t> hex_decode(std::string_view hex) {
  if (hex.size() % 2 != 0) {
    raise(Errc::odd_length_hex, "hex string has odd length");
  }
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) {
      raise(Errc::bad_config, "invalid hex digit");
    }
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

std::vector<std::string> words_from_hex(std::string_view hex,
                                        unsigned word_bytes) {
  if (hex.size() % 2 != 0) {
    raise(Errc::odd_length_hex, "hex string has odd length");
  }
  const std::size_t width = 2 * static_cast<std::size_t>(word_bytes);
  std::vector<std::string> words;
  words.reserve((hex.size() + width - 1) / width);
  for (std::size_t pos = 0; pos < hex.size(); pos += width) {
    words.emplace_back(hex.substr(pos, width));
  }
  return words;
}

std::vector<std::string> char_ngrams(std::string_view word, unsigned minn,
                                     unsigned maxn) {
  std::string bracketed;
  bracketed.reserve(word.size() + 2);
  bracketed.push_back('<');
  bracketed.append(word);
  bracketed.push_back('>');

  std::vector<std::string> ngrams;
  const std::size_t len = bracketed.size();
  for (std::size_t i = 0; i < len; ++i) {
    for (std::size_t n = minn; n <= maxn && i + n <= len; ++n) {
      ngrams.emplace_back(bracketed.substr(i, n));
    }
  }
  return ngrams;
}

std::uint32_t fnv1a32(std::span<const std::uint8_t> data) {
  std::uint32_t h = 2166136261u;
  for (const std::uint8_t byte : data) {
    h ^= byte;
    h *= 16777619u;
  }
  return h;
}

std::uint32_t fnv1a32(std::string_view s) {
  return fnv1a32(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

Vocabulary Vocabulary::build(const std::vector<HexDocument>& corpus,
                             const TokenizerConfig& cfg) {
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& doc : corpus) {
    for (const auto& word : doc.words) {
      ++counts[word];
    }
  }
  if (counts.empty()) {
    raise(Errc::empty_corpus, "cannot build a vocabulary from an empty corpus");
  }

  std::vector<std::pair<std::string, std::uint64_t>> rows;
  rows.reserve(counts.size());
  for (auto& [word, count] : counts) {
    if (count >= cfg.min_count) rows.emplace_back(word, count);
  }
  if (rows.empty()) {
    raise(Errc::empty_corpus, "min_count filtered out every word");
  }
  // count desc, word asc: makes id assignment bit-reproducible
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return from_rows(std::move(rows), cfg.buckets);
}

Vocabulary Vocabulary::from_rows(
    std::vector<std::pair<std::string, std::uint64_t>> rows,
    std::uint64_t buckets) {
  Vocabulary vocab;
  vocab.words_ = std::move(rows);
  vocab.buckets_ = buckets;
  vocab.index_.reserve(vocab.words_.size());
  for (std::size_t id = 0; id < vocab.words_.size(); ++id) {
    vocab.index_.emplace(vocab.words_[id].first, static_cast<TokenId>(id));
  }
  return vocab;
}

std::int64_t Vocabulary::word_id(std::string_view word) const {
  const auto it = index_.find(word);
  if (it == index_.end()) return -1;
  return it->second;
}

TokenId Vocabulary::ngram_id(std::string_view ngram) const {
  return static_cast<TokenId>(size() + fnv1a32(ngram) % buckets_);
}

std::vector<TokenId> word_input_ids(std::string_view word,
                                    const Vocabulary& vocab,
                                    const TokenizerConfig& cfg) {
  std::vector<TokenId> ids;
  const std::int64_t id = vocab.word_id(word);
  if (id >= 0) ids.push_back(static_cast<TokenId>(id));
  for (const auto& ngram : char_ngrams(word, cfg.minn, cfg.maxn)) {
    ids.push_back(vocab.ngram_id(ngram));
  }
  return ids;
}

std::vector<TokenId> doc_to_ids(const HexDocument& doc,
                                const Vocabulary& vocab,
                                const TokenizerConfig& cfg) {
  std::vector<TokenId> ids;
  for (const auto& word : doc.words) {
    const auto word_ids = word_input_ids(word, vocab, cfg);
    ids.insert(ids.end(), word_ids.begin(), word_ids.end());
  }
  return ids;
}

HexDocument make_document(std::span<const std::uint8_t> bytes,
                          const TokenizerConfig& cfg, std::string label,
                          DocOrigin origin, std::string day) {
  if (bytes.size() > cfg.max_packet_bytes) {
    bytes = bytes.first(cfg.max_packet_bytes);
  }
  HexDocument doc;
  doc.words = words_from_hex(hex_encode(bytes), cfg.word_bytes);
  doc.label = std::move(label);
  doc.origin = std::move(origin);
  doc.day = std::move(day);
  return doc;
}

std::string emit_corpus_record(const HexDocument& doc) {
  std::string line;
  if (!doc.label.empty()) {
    for (const char c : doc.label) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        raise(Errc::label_whitespace,
              "label contains whitespace: '" + doc.label + "'");
      }
    }
    line.append(kLabelPrefix);
    line.append(doc.label);
  }
  for (const auto& word : doc.words) {
    if (!line.empty()) line.push_back(' ');
    line.append(word);
  }
  return line;
}

HexDocument parse_corpus_record(std::string_view line) {
  HexDocument doc;
  std::size_t pos = 0;
  while (pos < line.size()) {
    const std::size_t space = line.find(' ', pos);
    const std::string_view token =
        line.substr(pos, space == std::string_view::npos ? space : space - pos);
    pos = space == std::string_view::npos ? line.size() : space + 1;
    if (token.empty()) continue;
    if (doc.words.empty() && doc.label.empty() &&
        token.starts_with(kLabelPrefix)) {
      doc.label = std::string(token.substr(kLabelPrefix.size()));
    } else {
      doc.words.emplace_back(token);
    }
  }
  return doc;
}

}  // namespace fastpacket
