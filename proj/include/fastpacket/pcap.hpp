#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fastpacket {

enum class ByteOrder { little, big };
enum class TsResolution { micro, nano };

inline constexpr std::uint32_t kMagicMicro = 0xA1B2C3D4u;
inline constexpr std::uint32_t kMagicNano = 0xA1B23C4Du;
inline constexpr std::uint32_t kLinkEthernet = 1;
inline constexpr std::uint32_t kLinkRawIp = 101;
inline constexpr std::size_t kGlobalHeaderSize = 24;
inline constexpr std::size_t kRecordHeaderSize = 16;

// Decoded classic-pcap global header. thiszone/sigfigs are retained so an
// accepted file can be re-serialized byte for byte.
struct PcapHeader {
  std::uint32_t magic = kMagicMicro;
  ByteOrder byte_order = ByteOrder::little;
  TsResolution ts_resolution = TsResolution::micro;
  std::uint16_t version_major = 2;
  std::uint16_t version_minor = 4;
  std::int32_t thiszone = 0;
  std::uint32_t sigfigs = 0;
  std::uint32_t snaplen = 0;
  std::uint32_t linktype = 0;
};

struct ParsedPacket {
  std::uint64_t index = 0;  // ordinal within the file
  std::uint32_t ts_sec = 0;
  std::uint32_t ts_frac = 0;  // micro- or nanoseconds per header resolution
  std::uint32_t captured_len = 0;
  std::uint32_t original_len = 0;
  std::vector<std::uint8_t> data;  // exactly captured_len bytes
  std::uint32_t linktype = 0;
  TsResolution ts_resolution = TsResolution::micro;

  double ts_seconds() const {
    const double scale =
        ts_resolution == TsResolution::micro ? 1e-6 : 1e-9;
    return static_cast<double>(ts_sec) + scale * static_cast<double>(ts_frac);
  }
};

// Decodes the 24-byte global header; byte order is inferred from the magic.
// Throws unknown_magic / unsupported_version / truncated_header.
PcapHeader parse_global_header(std::span<const std::uint8_t> bytes24);

// Single-pass streaming record reader; one reader per stream.
class PcapReader {
 public:
  explicit PcapReader(std::istream& in);

  const PcapHeader& header() const { return header_; }

  // Next packet in file order, or nullopt at a clean end-of-stream on a
  // record boundary. Throws truncated_record / record_too_large.
  std::optional<ParsedPacket> next();

 private:
  std::istream& in_;
  PcapHeader header_;
  std::uint64_t index_ = 0;
};

std::vector<ParsedPacket> read_packets(std::istream& in);
std::vector<ParsedPacket> read_pcap_file(const std::string& path);

// Inverse of the parser: re-serializes a header/record with the byte order
// and resolution recorded at parse time.
void write_global_header(std::ostream& out, const PcapHeader& header);
void write_record(std::ostream& out, const PcapHeader& header,
                  const ParsedPacket& pkt);

}  // namespace fastpacket
