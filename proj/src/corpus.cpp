#include "fastpacket/corpus.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "fastpacket/error.hpp"

namespace fastpacket {
namespace {

constexpr std::string_view kDayTag = "# day=";
constexpr std::string_view kFileTag = "# file=";

}  // namespace

void write_corpus(std::ostream& out, const std::vector<HexDocument>& docs) {
  std::string day;
  std::string file;
  bool first = true;
  for (const auto& doc : docs) {
    if (first || doc.day != day) {
      day = doc.day;
      if (!day.empty()) out << kDayTag << day << '\n';
    }
    if (first || doc.origin.file != file) {
      file = doc.origin.file;
      if (!file.empty()) out << kFileTag << file << '\n';
    }
    out << emit_corpus_record(doc) << '\n';
    first = false;
  }
}

void write_corpus_file(const std::string& path,
                       const std::vector<HexDocument>& docs) {
  std::ofstream out(path);
  if (!out) {
    raise(Errc::io_failure, "cannot open corpus for writing: " + path);
  }
  write_corpus(out, docs);
  out.flush();
  if (!out) {
    raise(Errc::io_failure, "failed writing corpus: " + path);
  }
}

std::vector<HexDocument> read_corpus(std::istream& in) {
  std::vector<HexDocument> docs;
  std::string line;
  std::string day;
  std::string file;
  std::uint64_t index = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line.starts_with(kDayTag)) {
        day = line.substr(kDayTag.size());
      } else if (line.starts_with(kFileTag)) {
        file = line.substr(kFileTag.size());
        index = 0;
      }
      continue;
    }
    HexDocument doc = parse_corpus_record(line);
    doc.day = day;
    doc.origin.file = file;
    doc.origin.packet_index = index++;
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<HexDocument> read_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    raise(Errc::io_failure, "cannot open corpus: " + path);
  }
  return read_corpus(in);
}

}  // namespace fastpacket
