#pragma once

#include <stdexcept>
#include <string>

namespace fastpacket {

// Failure codes for every typed error the toolkit can raise. The CLI maps
// categories to process exit codes: data/format errors exit 2, numeric
// errors exit 3 (usage errors are handled by the argument parser itself).
enum class Errc {
  // pcap parsing
  unknown_magic,
  unsupported_version,
  truncated_header,
  truncated_record,
  record_too_large,
  // label CSV
  malformed_row,
  overlapping_interval,
  // tokenizer
  odd_length_hex,
  empty_corpus,
  label_whitespace,
  bad_config,
  // embedding model
  no_labels,
  empty_document,
  not_supervised,
  out_of_vocabulary,
  dim_mismatch,
  // svm
  empty_dataset,
  nonpositive_lambda,
  // evaluation
  unknown_day,
  empty_partition,
  unknown_label,
  // model container
  bad_magic,
  corrupt_section,
  io_failure,
  // numeric
  non_finite,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) {
  throw Error(code, what);
}

// Process exit code for a failure category (see External Interfaces).
inline int exit_code(Errc code) noexcept {
  return code == Errc::non_finite ? 3 : 2;
}

const char* errc_name(Errc code) noexcept;

}  // namespace fastpacket
