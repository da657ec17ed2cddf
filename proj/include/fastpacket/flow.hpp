#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>

#include "fastpacket/pcap.hpp"

namespace fastpacket {

// Bidirectional-canonical 5-tuple. Addresses and ports are kept in host
// order; canonical() maps a flow and its reverse to the same key.
struct FlowKey {
  std::uint32_t src_ip = 0;
  std::uint32_t dst_ip = 0;
  std::uint16_t src_port = 0;  // 0 when the protocol has no ports
  std::uint16_t dst_port = 0;
  std::uint8_t protocol = 0;

  auto operator<=>(const FlowKey&) const = default;

  FlowKey canonical() const {
    FlowKey k = *this;
    if (std::tie(k.src_ip, k.src_port) > std::tie(k.dst_ip, k.dst_port)) {
      std::swap(k.src_ip, k.dst_ip);
      std::swap(k.src_port, k.dst_port);
    }
    return k;
  }
};

struct FlowKeyHash {
  std::size_t operator()(const FlowKey& k) const noexcept {
    std::uint64_t a = (static_cast<std::uint64_t>(k.src_ip) << 32) | k.dst_ip;
    std::uint64_t b = (static_cast<std::uint64_t>(k.src_port) << 24) |
                      (static_cast<std::uint64_t>(k.dst_port) << 8) |
                      k.protocol;
    // splitmix-style mix of both halves
    std::uint64_t x = a ^ (b + 0x9E3779B97F4A7C15ull + (a << 6) + (a >> 2));
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    return static_cast<std::size_t>(x);
  }
};

std::string format_ipv4(std::uint32_t ip);
std::optional<std::uint32_t> parse_ipv4(std::string_view text);

// Canonical 5-tuple of an Ethernet or raw-IP packet; nullopt for anything
// that is not parseable IPv4 (never a failure).
std::optional<FlowKey> extract_five_tuple(const ParsedPacket& pkt);

enum class SlicePolicy { full, ip_onward, payload_only };

std::optional<SlicePolicy> slice_policy_from_name(std::string_view name);

// View of the bytes to embed under the given policy. Falls back to the whole
// capture when the requested layer cannot be located.
std::span<const std::uint8_t> slice_embedding_bytes(const ParsedPacket& pkt,
                                                    SlicePolicy policy);

}  // namespace fastpacket
