#include <doctest.h>

#include <sstream>
#include <string>

#include "fastpacket/error.hpp"
#include "fastpacket/labels.hpp"

using namespace fastpacket;

namespace {

constexpr const char* kHeader =
    "src_ip,src_port,dst_ip,dst_port,protocol,start_ts,end_ts,label";

LabelTable table_of(const std::string& rows) {
  std::istringstream in(std::string(kHeader) + "\n" + rows);
  return load_label_table(in);
}

template <typename F>
Errc thrown_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::malformed_row;
}

FlowKey key_of(std::uint32_t src, std::uint16_t sport, std::uint32_t dst,
               std::uint16_t dport, std::uint8_t proto) {
  FlowKey key;
  key.src_ip = src;
  key.src_port = sport;
  key.dst_ip = dst;
  key.dst_port = dport;
  key.protocol = proto;
  return key;
}

constexpr std::uint32_t kHostA = 0x0A000001;
constexpr std::uint32_t kHostB = 0x0A000002;

}  // namespace

TEST_CASE("lookup hits inside the closed interval and misses outside") {
  const auto table = table_of(
      "10.0.0.1,53,10.0.0.2,999,17,100.5,200.5,DDOS\n"
      "10.0.0.1,53,10.0.0.2,999,17,300,400,PORTSCAN\n");
  CHECK(table.key_count() == 1);

  const auto key = key_of(kHostA, 53, kHostB, 999, 17);
  CHECK(table.lookup(key, 100.5) == "DDOS");   // closed at the start
  CHECK(table.lookup(key, 150.0) == "DDOS");
  CHECK(table.lookup(key, 200.5) == "DDOS");   // closed at the end
  CHECK(table.lookup(key, 350.0) == "PORTSCAN");
  CHECK(!table.lookup(key, 250.0).has_value());
  CHECK(!table.lookup(key, 99.0).has_value());

  const auto other = key_of(kHostA, 54, kHostB, 999, 17);
  CHECK(!table.lookup(other, 150.0).has_value());
}

TEST_CASE("reversed-direction rows and lookups join via the canonical key") {
  const auto table = table_of("10.0.0.2,999,10.0.0.1,53,17,0,10,DDOS\n");
  const auto forward = key_of(kHostA, 53, kHostB, 999, 17);
  const auto reverse = key_of(kHostB, 999, kHostA, 53, 17);
  CHECK(table.lookup(forward, 5) == "DDOS");
  CHECK(table.lookup(reverse, 5) == "DDOS");
}

TEST_CASE("csv schema violations are malformed rows") {
  CHECK(thrown_code([] {
          std::istringstream in("ip,port\n");
          load_label_table(in);
        }) == Errc::malformed_row);

  CHECK(thrown_code([] { table_of("10.0.0.1,53,10.0.0.2,999,17,0,10\n"); }) ==
        Errc::malformed_row);

  CHECK(thrown_code([] {
          table_of("10.0.0.1,53,10.0.0.2,999,17,zero,10,X\n");
        }) == Errc::malformed_row);

  CHECK(thrown_code([] {
          table_of("10.0.0.300,53,10.0.0.2,999,17,0,10,X\n");
        }) == Errc::malformed_row);

  CHECK(thrown_code([] {
          table_of("10.0.0.1,53,10.0.0.2,999,17,10,0,X\n");
        }) == Errc::malformed_row);

  CHECK(thrown_code([] {
          table_of("10.0.0.1,70000,10.0.0.2,999,17,0,10,X\n");
        }) == Errc::malformed_row);
}

TEST_CASE("intersecting intervals under one key are rejected") {
  CHECK(thrown_code([] {
          table_of(
              "10.0.0.1,53,10.0.0.2,999,17,0,10,A\n"
              "10.0.0.1,53,10.0.0.2,999,17,5,15,B\n");
        }) == Errc::overlapping_interval);

  // closed intervals: sharing an endpoint intersects
  CHECK(thrown_code([] {
          table_of(
              "10.0.0.1,53,10.0.0.2,999,17,0,10,A\n"
              "10.0.0.1,53,10.0.0.2,999,17,10,20,B\n");
        }) == Errc::overlapping_interval);

  // same window on the reversed key is the same flow
  CHECK(thrown_code([] {
          table_of(
              "10.0.0.1,53,10.0.0.2,999,17,0,10,A\n"
              "10.0.0.2,999,10.0.0.1,53,17,3,7,B\n");
        }) == Errc::overlapping_interval);

  CHECK_NOTHROW(table_of(
      "10.0.0.1,53,10.0.0.2,999,17,0,10,A\n"
      "10.0.0.1,53,10.0.0.2,999,17,10.5,20,B\n"
      "10.0.0.1,54,10.0.0.2,999,17,0,10,C\n"));
}

TEST_CASE("blank lines and crlf endings are tolerated") {
  const auto table = table_of(
      "10.0.0.1,53,10.0.0.2,999,17,0,10,DDOS\r\n"
      "\n"
      "10.0.0.3,1,10.0.0.4,2,6,0,10,BOT\r\n");
  CHECK(table.key_count() == 2);
  CHECK(table.lookup(key_of(kHostA, 53, kHostB, 999, 17), 1) == "DDOS");
}

TEST_CASE("label_packet falls back for keyless packets and interval misses") {
  const auto table = table_of("10.0.0.1,53,10.0.0.2,999,17,0,10,DDOS\n");
  const auto key = key_of(kHostA, 53, kHostB, 999, 17);
  CHECK(label_packet(key, 5, table, "BENIGN") == "DDOS");
  CHECK(label_packet(key, 11, table, "BENIGN") == "BENIGN");
  CHECK(label_packet(std::nullopt, 5, table, "BENIGN") == "BENIGN");
}
