#include "fastpacket/error.hpp"

namespace fastpacket {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::unknown_magic: return "unknown_magic";
    case Errc::unsupported_version: return "unsupported_version";
    case Errc::truncated_header: return "truncated_header";
    case Errc::truncated_record: return "truncated_record";
    case Errc::record_too_large: return "record_too_large";
    case Errc::malformed_row: return "malformed_row";
    case Errc::overlapping_interval: return "overlapping_interval";
    case Errc::odd_length_hex: return "odd_length_hex";
    case Errc::empty_corpus: return "empty_corpus";
    case Errc::label_whitespace: return "label_whitespace";
    case Errc::bad_config: return "bad_config";
    case Errc::no_labels: return "no_labels";
    case Errc::empty_document: return "empty_document";
    case Errc::not_supervised: return "not_supervised";
    case Errc::out_of_vocabulary: return "out_of_vocabulary";
    case Errc::dim_mismatch: return "dim_mismatch";
    case Errc::empty_dataset: return "empty_dataset";
    case Errc::nonpositive_lambda: return "nonpositive_lambda";
    case Errc::unknown_day: return "unknown_day";
    case Errc::empty_partition: return "empty_partition";
    case Errc::unknown_label: return "unknown_label";
    case Errc::bad_magic: return "bad_magic";
    case Errc::corrupt_section: return "corrupt_section";
    case Errc::io_failure: return "io_failure";
    case Errc::non_finite: return "non_finite";
  }
  return "unknown";
}

}  // namespace fastpacket
