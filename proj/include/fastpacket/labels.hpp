#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fastpacket/flow.hpp"

namespace fastpacket {

struct LabelInterval {
  double start_ts = 0;
  double end_ts = 0;
  std::string label;
};

// Flow-label table joined against packets by canonical 5-tuple plus a closed
// time interval. Intervals under one key must not intersect, so a lookup hits
// at most one interval.
class LabelTable {
 public:
  std::optional<std::string> lookup(const FlowKey& key, double ts) const;

  std::size_t key_count() const { return entries_.size(); }

  void insert(const FlowKey& key, LabelInterval interval);

  // Sorts intervals per key and rejects intersections.
  void validate() const;

 private:
  std::unordered_map<FlowKey, std::vector<LabelInterval>, FlowKeyHash>
      entries_;
};

// Parses the CSV schema
//   src_ip,src_port,dst_ip,dst_port,protocol,start_ts,end_ts,label
// with decimal-seconds timestamps. Keys are canonicalized on load.
LabelTable load_label_table(std::istream& csv);
LabelTable load_label_table_file(const std::string& path);

// Total labeling: the interval's label when (key, ts) hits one, otherwise
// fallback. A missing key (non-IP packet) also maps to fallback.
std::string label_packet(const std::optional<FlowKey>& key, double ts,
                         const LabelTable& table, const std::string& fallback);

}  // namespace fastpacket
