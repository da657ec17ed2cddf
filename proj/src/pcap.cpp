#include "fastpacket/pcap.hpp"

#include <array>
#include <fstream>
#include <istream>
#include <ostream>

#include "fastpacket/error.hpp"

namespace fastpacket {
namespace {

std::uint32_t decode_u32(const std::uint8_t* p, ByteOrder order) {
  if (order == ByteOrder::little) {
    return static_cast<std::uint32_t>(p[0]) |
           static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 |
           static_cast<std::uint32_t>(p[3]) << 24;
  }
  return static_cast<std::uint32_t>(p[0]) << 24 |
         static_cast<std::uint32_t>(p[1]) << 16 |
         static_cast<std::uint32_t>(p[2]) << 8 |
         static_cast<std::uint32_t>(p[3]);
}

std::uint16_t decode_u16(const std::uint8_t* p, ByteOrder order) {
  if (order == ByteOrder::little) {
    return static_cast<std::uint16_t>(p[0] | p[1] << 8);
  }
  return static_cast<std::uint16_t>(p[0] << 8 | p[1]);
}

void encode_u32(std::uint32_t v, ByteOrder order, std::uint8_t* p) {
  if (order == ByteOrder::little) {
    p[0] = static_cast<std::uint8_t>(v);
    p[1] = static_cast<std::uint8_t>(v >> 8);
    p[2] = static_cast<std::uint8_t>(v >> 16);
    p[3] = static_cast<std::uint8_t>(v >> 24);
  } else {
    p[0] = static_cast<std::uint8_t>(v >> 24);
    p[1] = static_cast<std::uint8_t>(v >> 16);
    p[2] = static_cast<std::uint8_t>(v >> 8);
    p[3] = static_cast<std::uint8_t>(v);
  }
}

void encode_u16(std::uint16_t v, ByteOrder order, std::uint8_t* p) {
  if (order == ByteOrder::little) {
    p[0] = static_cast<std::uint8_t>(v);
    p[1] = static_cast<std::uint8_t>(v >> 8);
  } else {
    p[0] = static_cast<std::uint8_t>(v >> 8);
    p[1] = static_cast<std::uint8_t>(v);
  }
}

}  // namespace

PcapHeader parse_global_header(std::span<const std::uint8_t> bytes24) {
  if (bytes24.size() < kGlobalHeaderSize) {
    raise(Errc::truncated_header,
          "pcap global header needs 24 bytes, got " +
              std::to_string(bytes24.size()));
  }
  const std::uint8_t* p = bytes24.data();

  PcapHeader h;
  const std::uint32_t le = decode_u32(p, ByteOrder::little);
  const std::uint32_t be = decode_u32(p, ByteOrder::big);
  if (le == kMagicMicro || le == kMagicNano) {
    h.byte_order = ByteOrder::little;
    h.magic = le;
  } else if (be == kMagicMicro || be == kMagicNano) {
    h.byte_order = ByteOrder::big;
    h.magic = be;
  } else {
    raise(Errc::unknown_magic, "not a classic pcap file (unknown magic)");
  }
  h.ts_resolution =
      h.magic == kMagicNano ? TsResolution::nano : TsResolution::micro;

  h.version_major = decode_u16(p + 4, h.byte_order);
  h.version_minor = decode_u16(p + 6, h.byte_order);
  if (h.version_major != 2 || h.version_minor != 4) {
    raise(Errc::unsupported_version,
          "unsupported pcap version " + std::to_string(h.version_major) + "." +
              std::to_string(h.version_minor));
  }
  h.thiszone = static_cast<std::int32_t>(decode_u32(p + 8, h.byte_order));
  h.sigfigs = decode_u32(p + 12, h.byte_order);
  h.snaplen = decode_u32(p + 16, h.byte_order);
  h.linktype = decode_u32(p + 20, h.byte_order);
  return h;
}

PcapReader::PcapReader(std::istream& in) : in_(in) {
  std::array<std::uint8_t, kGlobalHeaderSize> buf{};
  in_.read(reinterpret_cast<char*>(buf.data()), buf.size());
  if (static_cast<std::size_t>(in_.gcount()) != buf.size()) {
    raise(Errc::truncated_header, "file too short for a pcap global header");
  }
  header_ = parse_global_header(buf);
}

std::optional<ParsedPacket> PcapReader::next() {
  std::array<std::uint8_t, kRecordHeaderSize> rec{};
  in_.read(reinterpret_cast<char*>(rec.data()), rec.size());
  const auto got = static_cast<std::size_t>(in_.gcount());
  if (got == 0) {
    return std::nullopt;  // clean EOF on a record boundary
  }
  if (got != rec.size()) {
    raise(Errc::truncated_record,
          "EOF inside record header of packet " + std::to_string(index_));
  }

  ParsedPacket pkt;
  pkt.index = index_;
  pkt.ts_sec = decode_u32(rec.data(), header_.byte_order);
  pkt.ts_frac = decode_u32(rec.data() + 4, header_.byte_order);
  pkt.captured_len = decode_u32(rec.data() + 8, header_.byte_order);
  pkt.original_len = decode_u32(rec.data() + 12, header_.byte_order);
  pkt.linktype = header_.linktype;
  pkt.ts_resolution = header_.ts_resolution;

  if (pkt.captured_len > header_.snaplen) {
    raise(Errc::record_too_large,
          "packet " + std::to_string(index_) + " captured_len " +
              std::to_string(pkt.captured_len) + " exceeds snaplen " +
              std::to_string(header_.snaplen));
  }
  if (pkt.captured_len > pkt.original_len) {
    raise(Errc::record_too_large,
          "packet " + std::to_string(index_) +
              " captured_len exceeds original_len");
  }

  pkt.data.resize(pkt.captured_len);
  if (pkt.captured_len > 0) {
    in_.read(reinterpret_cast<char*>(pkt.data.data()), pkt.captured_len);
    if (static_cast<std::uint32_t>(in_.gcount()) != pkt.captured_len) {
      raise(Errc::truncated_record,
            "EOF inside data of packet " + std::to_string(index_));
    }
  }
  ++index_;
  return pkt;
}

std::vector<ParsedPacket> read_packets(std::istream& in) {
  PcapReader reader(in);
  std::vector<ParsedPacket> packets;
  while (auto pkt = reader.next()) {
    packets.push_back(std::move(*pkt));
  }
  return packets;
}

std::vector<ParsedPacket> read_pcap_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    raise(Errc::io_failure, "cannot open pcap file: " + path);
  }
  return read_packets(in);
}

void write_global_header(std::ostream& out, const PcapHeader& header) {
  std::array<std::uint8_t, kGlobalHeaderSize> buf{};
  encode_u32(header.magic, header.byte_order, buf.data());
  encode_u16(header.version_major, header.byte_order, buf.data() + 4);
  encode_u16(header.version_minor, header.byte_order, buf.data() + 6);
  encode_u32(static_cast<std::uint32_t>(header.thiszone), header.byte_order,
             buf.data() + 8);
  encode_u32(header.sigfigs, header.byte_order, buf.data() + 12);
  encode_u32(header.snaplen, header.byte_order, buf.data() + 16);
  encode_u32(header.linktype, header.byte_order, buf.data() + 20);
  out.write(reinterpret_cast<const char*>(buf.data()), buf.size());
}

void write_record(std::ostream& out, const PcapHeader& header,
                  const ParsedPacket& pkt) {
  std::array<std::uint8_t, kRecordHeaderSize> buf{};
  encode_u32(pkt.ts_sec, header.byte_order, buf.data());
  encode_u32(pkt.ts_frac, header.byte_order, buf.data() + 4);
  encode_u32(pkt.captured_len, header.byte_order, buf.data() + 8);
  encode_u32(pkt.original_len, header.byte_order, buf.data() + 12);
  out.write(reinterpret_cast<const char*>(buf.data()), buf.size());
  out.write(reinterpret_cast<const char*>(pkt.data.data()),
            static_cast<std::streamsize>(pkt.data.size()));
}

}  // namespace fastpacket
