#include "fastpacket/labels.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "fastpacket/error.hpp"

namespace fastpacket {
namespace {

constexpr std::string_view kExpectedHeader =
    "src_ip,src_port,dst_ip,dst_port,protocol,start_ts,end_ts,label";

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view field, std::size_t row) {
  T value{};
  auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    raise(Errc::malformed_row, "label CSV row " + std::to_string(row) +
                                   ": bad number '" + std::string(field) +
                                   "'");
  }
  return value;
}

}  // namespace

void LabelTable::insert(const FlowKey& key, LabelInterval interval) {
  entries_[key.canonical()].push_back(std::move(interval));
}

void LabelTable::validate() const {
  for (const auto& [key, raw] : entries_) {
    auto intervals = raw;
    std::sort(intervals.begin(), intervals.end(),
              [](const LabelInterval& a, const LabelInterval& b) {
                return a.start_ts < b.start_ts;
              });
    for (std::size_t i = 1; i < intervals.size(); ++i) {
      // Closed intervals: sharing an endpoint already breaks uniqueness.
      if (intervals[i].start_ts <= intervals[i - 1].end_ts) {
        raise(Errc::overlapping_interval,
              "overlapping label intervals for flow " +
                  format_ipv4(key.src_ip) + ":" +
                  std::to_string(key.src_port) + " <-> " +
                  format_ipv4(key.dst_ip) + ":" +
                  std::to_string(key.dst_port));
      }
    }
  }
}

std::optional<std::string> LabelTable::lookup(const FlowKey& key,
                                              double ts) const {
  const auto it = entries_.find(key.canonical());
  if (it == entries_.end()) return std::nullopt;
  for (const auto& interval : it->second) {
    if (ts >= interval.start_ts && ts <= interval.end_ts) {
      return interval.label;
    }
  }
  return std::nullopt;
}

LabelTable load_label_table(std::istream& csv) {
  std::string line;
  if (!std::getline(csv, line) || strip_cr(line) != kExpectedHeader) {
    raise(Errc::malformed_row,
          "label CSV must start with header: " + std::string(kExpectedHeader));
  }

  LabelTable table;
  std::size_t row = 1;
  while (std::getline(csv, line)) {
    ++row;
    const std::string_view body = strip_cr(line);
    if (body.empty()) continue;
    const auto fields = split_csv(body);
    if (fields.size() != 8) {
      raise(Errc::malformed_row, "label CSV row " + std::to_string(row) +
                                     ": expected 8 fields, got " +
                                     std::to_string(fields.size()));
    }

    FlowKey key;
    const auto src = parse_ipv4(fields[0]);
    const auto dst = parse_ipv4(fields[2]);
    if (!src || !dst) {
      raise(Errc::malformed_row,
            "label CSV row " + std::to_string(row) + ": bad IPv4 address");
    }
    key.src_ip = *src;
    key.dst_ip = *dst;
    key.src_port = parse_number<std::uint16_t>(fields[1], row);
    key.dst_port = parse_number<std::uint16_t>(fields[3], row);
    key.protocol = parse_number<std::uint8_t>(fields[4], row);

    LabelInterval interval;
    interval.start_ts = parse_number<double>(fields[5], row);
    interval.end_ts = parse_number<double>(fields[6], row);
    interval.label = std::string(fields[7]);
    if (interval.end_ts < interval.start_ts) {
      raise(Errc::malformed_row,
            "label CSV row " + std::to_string(row) + ": end_ts before start_ts");
    }
    table.insert(key, std::move(interval));
  }
  table.validate();
  return table;
}

LabelTable load_label_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    raise(Errc::io_failure, "cannot open label CSV: " + path);
  }
  return load_label_table(in);
}

std::string label_packet(const std::optional<FlowKey>& key, double ts,
                         const LabelTable& table,
                         const std::string& fallback) {
  if (!key) return fallback;
  if (auto label = table.lookup(*key, ts)) return *label;
  return fallback;
}

}  // namespace fastpacket
