#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "fastpacket/error.hpp"
#include "fastpacket/rng.hpp"
#include "fastpacket/tokenizer.hpp"

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

// Independent FNV-1a reference: 64-bit arithmetic reduced mod 2^32 each
// step, written against the published algorithm description.
std::uint32_t fnv1a32_reference(std::string_view s) {
  std::uint64_t h = 2166136261u;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h = (h * 16777619u) % 4294967296u;
  }
  return static_cast<std::uint32_t>(h);
}

HexDocument doc_of(std::vector<std::string> words, std::string label = {}) {
  HexDocument doc;
  doc.words = std::move(words);
  doc.label = std::move(label);
  return doc;
}

TokenizerConfig small_config() {
  TokenizerConfig cfg;
  cfg.word_bytes = 2;
  cfg.minn = 2;
  cfg.maxn = 4;
  cfg.buckets = 16;
  return cfg;
}

}  // namespace

TEST_CASE("hex encoding is lowercase and invertible") {
  const std::vector<std::uint8_t> bytes = {0xDE, 0xAD, 0xBE, 0xEF};
  CHECK(hex_encode(bytes) == "deadbeef");
  CHECK(hex_decode("deadbeef") == bytes);
  CHECK(hex_encode({}).empty());

  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint8_t> data(rng.below(100));
    for (auto& b : data) b = static_cast<std::uint8_t>(rng.below(256));
    CHECK(hex_decode(hex_encode(data)) == data);
  }
}

TEST_CASE("hex words are fixed-width chunks with a short tail kept") {
  CHECK(words_from_hex("deadbeef", 2) ==
        std::vector<std::string>{"dead", "beef"});
  CHECK(words_from_hex("deadbe", 2) == std::vector<std::string>{"dead", "be"});
  CHECK(words_from_hex("de", 2) == std::vector<std::string>{"de"});
  CHECK(words_from_hex("", 2).empty());
  CHECK(words_from_hex("deadbeef", 1) ==
        std::vector<std::string>{"de", "ad", "be", "ef"});
  CHECK(thrown_code([] { words_from_hex("abc", 2); }) ==
        Errc::odd_length_hex);
}

TEST_CASE("char n-grams enumerate '<word>' by position, shortest first") {
  CHECK(char_ngrams("dead", 2, 4) ==
        std::vector<std::string>{"<d", "<de", "<dea", "de", "dea", "dead",
                                 "ea", "ead", "ead>", "ad", "ad>", "d>"});
  CHECK(char_ngrams("de", 3, 3) == std::vector<std::string>{"<de", "de>"});
  CHECK(char_ngrams("de", 4, 4) == std::vector<std::string>{"<de>"});
  CHECK(char_ngrams("de", 5, 6).empty());

  // duplicates are kept: "aa" -> "<aa>" has "aa" once but "<a"/"a>"-style
  // repeats appear for longer words
  const auto grams = char_ngrams("aaa", 2, 2);
  CHECK(grams == std::vector<std::string>{"<a", "aa", "aa", "a>"});
}

TEST_CASE("fnv1a32 matches the published test vectors") {
  CHECK(fnv1a32("") == 0x811C9DC5u);
  CHECK(fnv1a32("a") == 0xE40C292Cu);
  CHECK(fnv1a32("foobar") == 0xBF9CF968u);
}

TEST_CASE("fnv1a32 agrees with an independent reference on random strings") {
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    std::string s(rng.below(32), '\0');
    for (auto& c : s) {
      c = static_cast<char>(rng.below(256));
    }
    CAPTURE(trial);
    CHECK(fnv1a32(s) == fnv1a32_reference(s));
  }
}

TEST_CASE("tokenizer config invariants") {
  CHECK_NOTHROW(small_config().validate());

  auto cfg = small_config();
  cfg.word_bytes = 0;
  CHECK(thrown_code([&] { cfg.validate(); }) == Errc::bad_config);
  cfg = small_config();
  cfg.word_bytes = 9;
  CHECK(thrown_code([&] { cfg.validate(); }) == Errc::bad_config);
  cfg = small_config();
  cfg.minn = 0;
  CHECK(thrown_code([&] { cfg.validate(); }) == Errc::bad_config);
  cfg = small_config();
  cfg.minn = 5;
  cfg.maxn = 4;
  CHECK(thrown_code([&] { cfg.validate(); }) == Errc::bad_config);
  cfg = small_config();
  cfg.maxn = 7;  // 2*word_bytes + 2 = 6
  CHECK(thrown_code([&] { cfg.validate(); }) == Errc::bad_config);
  cfg = small_config();
  cfg.buckets = 0;
  CHECK(thrown_code([&] { cfg.validate(); }) == Errc::bad_config);
}

TEST_CASE("vocabulary orders by count desc then word asc") {
  const std::vector<HexDocument> corpus = {
      doc_of({"beef", "dead", "beef"}),
      doc_of({"dead", "beef", "aaaa"}),
      doc_of({"cafe", "aaaa"}),
  };
  auto cfg = small_config();
  const auto vocab = Vocabulary::build(corpus, cfg);

  REQUIRE(vocab.size() == 4);
  // counts: beef 3, dead 2, aaaa 2, cafe 1; the dead/aaaa tie breaks by
  // word ascending
  CHECK(vocab.word(0) == "beef");
  CHECK(vocab.count(0) == 3);
  CHECK(vocab.word(1) == "aaaa");
  CHECK(vocab.word(2) == "dead");
  CHECK(vocab.word(3) == "cafe");

  CHECK(vocab.word_id("beef") == 0);
  CHECK(vocab.word_id("cafe") == 3);
  CHECK(vocab.word_id("ffff") == -1);
  CHECK(vocab.bucket_count() == 16);
  CHECK(vocab.row_count() == 4 + 16);
}

TEST_CASE("min_count filters and empty survivor sets are an error") {
  auto cfg = small_config();
  cfg.min_count = 2;
  const std::vector<HexDocument> corpus = {
      doc_of({"dead", "dead", "beef"}),
  };
  const auto vocab = Vocabulary::build(corpus, cfg);
  CHECK(vocab.size() == 1);
  CHECK(vocab.word_id("dead") == 0);
  CHECK(vocab.word_id("beef") == -1);

  cfg.min_count = 5;
  CHECK(thrown_code([&] { Vocabulary::build(corpus, cfg); }) ==
        Errc::empty_corpus);
  CHECK(thrown_code([&] {
          Vocabulary::build(std::vector<HexDocument>{}, small_config());
        }) == Errc::empty_corpus);
}

TEST_CASE("ngram ids land in the bucket range after the words") {
  const std::vector<HexDocument> corpus = {doc_of({"dead", "beef"})};
  const auto cfg = small_config();
  const auto vocab = Vocabulary::build(corpus, cfg);
  const auto v = vocab.size();

  for (const auto& gram : char_ngrams("dead", cfg.minn, cfg.maxn)) {
    const TokenId id = vocab.ngram_id(gram);
    CHECK(id >= v);
    CHECK(id < v + vocab.bucket_count());
    CHECK(id == v + fnv1a32(gram) % vocab.bucket_count());
  }
}

TEST_CASE("word input ids are the word row plus its ngram buckets") {
  const std::vector<HexDocument> corpus = {doc_of({"dead", "beef"})};
  const auto cfg = small_config();
  const auto vocab = Vocabulary::build(corpus, cfg);

  const auto ids = word_input_ids("dead", vocab, cfg);
  const auto grams = char_ngrams("dead", cfg.minn, cfg.maxn);
  REQUIRE(ids.size() == 1 + grams.size());
  CHECK(ids[0] == static_cast<TokenId>(vocab.word_id("dead")));
  for (std::size_t i = 0; i < grams.size(); ++i) {
    CHECK(ids[i + 1] == vocab.ngram_id(grams[i]));
  }

  // out-of-vocabulary words still get their ngram buckets
  const auto oov = word_input_ids("ffff", vocab, cfg);
  CHECK(oov.size() == char_ngrams("ffff", cfg.minn, cfg.maxn).size());
  for (const TokenId id : oov) CHECK(id >= vocab.size());
}

TEST_CASE("documents chunk the sliced bytes and honor the byte cap") {
  auto cfg = small_config();
  cfg.max_packet_bytes = 4;
  const std::vector<std::uint8_t> bytes = {0xDE, 0xAD, 0xBE, 0xEF, 0x01,
                                           0x02};
  const auto doc = make_document(bytes, cfg, "DDOS", {"cap.pcap", 7}, "mon");
  CHECK(doc.words == std::vector<std::string>{"dead", "beef"});
  CHECK(doc.label == "DDOS");
  CHECK(doc.origin.file == "cap.pcap");
  CHECK(doc.origin.packet_index == 7);
  CHECK(doc.day == "mon");

  cfg.max_packet_bytes = 5;
  CHECK(make_document(bytes, cfg).words ==
        std::vector<std::string>{"dead", "beef", "01"});

  CHECK(make_document({}, cfg).words.empty());
}

TEST_CASE("corpus records round trip through text") {
  const auto doc = doc_of({"dead", "beef"}, "DDOS");
  const std::string line = emit_corpus_record(doc);
  CHECK(line == "__label__DDOS dead beef");

  const auto parsed = parse_corpus_record(line);
  CHECK(parsed.label == "DDOS");
  CHECK(parsed.words == doc.words);

  const auto unlabeled = doc_of({"dead"});
  CHECK(emit_corpus_record(unlabeled) == "dead");
  const auto reparsed = parse_corpus_record("dead beef");
  CHECK(reparsed.label.empty());
  CHECK(reparsed.words == std::vector<std::string>{"dead", "beef"});

  CHECK(parse_corpus_record("__label__DDOS").words.empty());
  CHECK(parse_corpus_record("").words.empty());
}

TEST_CASE("labels with whitespace cannot be serialized") {
  CHECK(thrown_code([] {
          emit_corpus_record(doc_of({"dead"}, "two words"));
        }) == Errc::label_whitespace);
  CHECK(thrown_code([] {
          emit_corpus_record(doc_of({"dead"}, "tab\tbed"));
        }) == Errc::label_whitespace);
}

TEST_CASE("doc_to_ids concatenates per-word ids in word order") {
  const std::vector<HexDocument> corpus = {doc_of({"dead", "beef"})};
  const auto cfg = small_config();
  const auto vocab = Vocabulary::build(corpus, cfg);

  const auto doc = doc_of({"dead", "beef"});
  const auto ids = doc_to_ids(doc, vocab, cfg);
  std::vector<TokenId> expected = word_input_ids("dead", vocab, cfg);
  const auto beef = word_input_ids("beef", vocab, cfg);
  expected.insert(expected.end(), beef.begin(), beef.end());
  CHECK(ids == expected);

  CHECK(doc_to_ids(doc_of({}), vocab, cfg).empty());
}

TEST_CASE("from_rows rebuilds an identical vocabulary") {
  const std::vector<HexDocument> corpus = {
      doc_of({"dead", "beef", "dead"}),
  };
  const auto cfg = small_config();
  const auto vocab = Vocabulary::build(corpus, cfg);

  std::vector<std::pair<std::string, std::uint64_t>> rows;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    rows.emplace_back(vocab.word(i), vocab.count(i));
  }
  const auto rebuilt = Vocabulary::from_rows(rows, vocab.bucket_count());
  REQUIRE(rebuilt.size() == vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    CHECK(rebuilt.word(i) == vocab.word(i));
    CHECK(rebuilt.count(i) == vocab.count(i));
    CHECK(rebuilt.word_id(vocab.word(i)) == static_cast<std::int64_t>(i));
  }
}
