#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fastpacket/tokenizer.hpp"

namespace fastpacket {

// Corpus text files hold one packet per line in emit_corpus_record format.
// Lines starting with '#' are metadata comments; "# day=<name>" and
// "# file=<path>" tag the documents that follow. Readers unaware of the
// convention can skip comment lines and still get a valid corpus.

void write_corpus(std::ostream& out, const std::vector<HexDocument>& docs);
void write_corpus_file(const std::string& path,
                       const std::vector<HexDocument>& docs);

std::vector<HexDocument> read_corpus(std::istream& in);
std::vector<HexDocument> read_corpus_file(const std::string& path);

}  // namespace fastpacket
