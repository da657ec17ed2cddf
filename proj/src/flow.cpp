#include "fastpacket/flow.hpp"

#include <charconv>

namespace fastpacket {
namespace {

constexpr std::uint16_t kEthertypeIpv4 = 0x0800;
constexpr std::uint16_t kEthertypeVlan = 0x8100;
constexpr std::uint8_t kProtoTcp = 6;
constexpr std::uint8_t kProtoUdp = 17;

std::uint16_t read_be16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] << 8 | p[1]);
}

std::uint32_t read_be32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) << 24 |
         static_cast<std::uint32_t>(p[1]) << 16 |
         static_cast<std::uint32_t>(p[2]) << 8 | static_cast<std::uint32_t>(p[3]);
}

// Byte offsets of the layers inside one packet. A value of npos means the
// layer could not be located.
struct Layers {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t ip = npos;         // start of the IPv4 header
  std::size_t transport = npos;  // start of the TCP/UDP header
  std::size_t payload = npos;    // first byte after the transport header
  std::uint8_t protocol = 0;
  std::uint32_t src_ip = 0;
  std::uint32_t dst_ip = 0;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  bool have_ip = false;
};

Layers locate_layers(const ParsedPacket& pkt) {
  Layers out;
  const std::uint8_t* p = pkt.data.data();
  const std::size_t len = pkt.data.size();

  std::size_t ip_off = 0;
  if (pkt.linktype == kLinkEthernet) {
    if (len < 14) return out;
    std::uint16_t ethertype = read_be16(p + 12);
    ip_off = 14;
    if (ethertype == kEthertypeVlan) {  // one 802.1Q tag
      if (len < 18) return out;
      ethertype = read_be16(p + 16);
      ip_off = 18;
    }
    if (ethertype != kEthertypeIpv4) return out;
  } else if (pkt.linktype == kLinkRawIp) {
    ip_off = 0;
  } else {
    return out;
  }

  if (ip_off + 20 > len) return out;
  const std::uint8_t version = p[ip_off] >> 4;
  const std::size_t ihl = static_cast<std::size_t>(p[ip_off] & 0x0F) * 4;
  if (version != 4 || ihl < 20 || ip_off + ihl > len) return out;

  out.ip = ip_off;
  out.have_ip = true;
  out.protocol = p[ip_off + 9];
  out.src_ip = read_be32(p + ip_off + 12);
  out.dst_ip = read_be32(p + ip_off + 16);

  const std::size_t tr = ip_off + ihl;
  if (out.protocol == kProtoTcp || out.protocol == kProtoUdp) {
    out.transport = tr;
    if (tr + 4 <= len) {
      out.src_port = read_be16(p + tr);
      out.dst_port = read_be16(p + tr + 2);
    }
    if (out.protocol == kProtoUdp) {
      if (tr + 8 <= len) out.payload = tr + 8;
    } else {
      if (tr + 13 <= len) {
        const std::size_t doff = static_cast<std::size_t>(p[tr + 12] >> 4) * 4;
        if (doff >= 20 && tr + doff <= len) out.payload = tr + doff;
      }
    }
  }
  return out;
}

}  // namespace

std::string format_ipv4(std::uint32_t ip) {
  return std::to_string(ip >> 24) + "." + std::to_string((ip >> 16) & 0xFF) +
         "." + std::to_string((ip >> 8) & 0xFF) + "." +
         std::to_string(ip & 0xFF);
}

std::optional<std::uint32_t> parse_ipv4(std::string_view text) {
  std::uint32_t ip = 0;
  const char* ptr = text.data();
  const char* end = text.data() + text.size();
  for (int octet = 0; octet < 4; ++octet) {
    unsigned value = 0;
    auto [next, ec] = std::from_chars(ptr, end, value);
    if (ec != std::errc{} || value > 255 || next == ptr) return std::nullopt;
    ip = ip << 8 | value;
    ptr = next;
    if (octet < 3) {
      if (ptr == end || *ptr != '.') return std::nullopt;
      ++ptr;
    }
  }
  if (ptr != end) return std::nullopt;
  return ip;
}

std::optional<FlowKey> extract_five_tuple(const ParsedPacket& pkt) {
  const Layers layers = locate_layers(pkt);
  if (!layers.have_ip) return std::nullopt;
  FlowKey key;
  key.src_ip = layers.src_ip;
  key.dst_ip = layers.dst_ip;
  key.src_port = layers.src_port;
  key.dst_port = layers.dst_port;
  key.protocol = layers.protocol;
  return key.canonical();
}

std::optional<SlicePolicy> slice_policy_from_name(std::string_view name) {
  if (name == "full") return SlicePolicy::full;
  if (name == "ip" || name == "ip_onward") return SlicePolicy::ip_onward;
  if (name == "payload" || name == "payload_only")
    return SlicePolicy::payload_only;
  return std::nullopt;
}

std::span<const std::uint8_t> slice_embedding_bytes(const ParsedPacket& pkt,
                                                    SlicePolicy policy) {
  const std::span<const std::uint8_t> full(pkt.data.data(), pkt.data.size());
  if (policy == SlicePolicy::full) return full;

  const Layers layers = locate_layers(pkt);
  if (policy == SlicePolicy::ip_onward) {
    if (!layers.have_ip) return full;
    return full.subspan(layers.ip);
  }
  if (layers.payload == Layers::npos) return full;
  return full.subspan(layers.payload);
}

}  // namespace fastpacket
