#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "flowgnn/error.hpp"
#include "flowgnn/flow.hpp"
#include "flowgnn/ipv4.hpp"

// Cisco NetFlow export format version 5.
// All multi-byte fields are big-endian on the wire.

namespace flowgnn::netflow_v5 {

inline constexpr std::size_t kHeaderSize = 24;
inline constexpr std::size_t kRecordSize = 48;
inline constexpr std::uint16_t kMaxRecords = 30;
inline constexpr double kDefaultIdleWindowSeconds = 600.0;

struct Header {
  std::uint16_t version = 5;
  std::uint16_t count = 0;
  std::uint32_t sys_uptime_ms = 0;
  std::uint32_t unix_secs = 0;
  std::uint32_t unix_nsecs = 0;
  std::uint32_t flow_sequence = 0;
  std::uint8_t engine_type = 0;
  std::uint8_t engine_id = 0;
  std::uint16_t sampling = 0;

  friend bool operator==(const Header&, const Header&) = default;
};

/// One unidirectional record. Fields we never use as features (nexthop,
/// interfaces, tcp_flags, AS numbers, masks, padding) are still kept so the
/// serializer reproduces the input bit for bit.
struct Record {
  Ipv4 srcaddr;
  Ipv4 dstaddr;
  Ipv4 nexthop;
  std::uint16_t input = 0;
  std::uint16_t output = 0;
  std::uint32_t packets = 0;
  std::uint32_t octets = 0;
  std::uint32_t first_ms = 0;
  std::uint32_t last_ms = 0;
  std::uint16_t srcport = 0;
  std::uint16_t dstport = 0;
  std::uint8_t pad1 = 0;
  std::uint8_t tcp_flags = 0;
  std::uint8_t protocol = 0;
  std::uint8_t tos = 0;
  std::uint16_t src_as = 0;
  std::uint16_t dst_as = 0;
  std::uint8_t src_mask = 0;
  std::uint8_t dst_mask = 0;
  std::uint16_t pad2 = 0;

  friend bool operator==(const Record&, const Record&) = default;
};

struct Packet {
  Header header;
  std::vector<Record> records;

  friend bool operator==(const Packet&, const Packet&) = default;
};

namespace detail {

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return bytes_[pos_++]; }
  std::uint16_t u16() {
    const auto hi = u8();
    return static_cast<std::uint16_t>((hi << 8) | u8());
  }
  std::uint32_t u32() {
    const std::uint32_t hi = u16();
    return (hi << 16) | u16();
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v >> 8));
    u8(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint32_t v) {
    u16(static_cast<std::uint16_t>(v >> 16));
    u16(static_cast<std::uint16_t>(v));
  }

 private:
  std::vector<std::uint8_t>& out_;
};

}  // namespace detail

/// Parses a concatenation of export packets. Each packet must be complete.
/// Trailing bytes shorter than a header are reported as TruncatedPacket.
inline std::vector<Packet> parse(std::span<const std::uint8_t> bytes) {
  std::vector<Packet> packets;
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const auto remaining = bytes.size() - offset;
    if (remaining < kHeaderSize) {
      throw Error(ErrorCode::TruncatedPacket,
                  "packet at offset " + std::to_string(offset) + " has only " +
                      std::to_string(remaining) + " bytes");
    }
    detail::Reader reader(bytes.subspan(offset));
    Packet packet;
    auto& h = packet.header;
    h.version = reader.u16();
    h.count = reader.u16();
    if (h.version != 5) {
      throw Error(ErrorCode::VersionMismatch, "packet at offset " + std::to_string(offset) +
                                                  " has version " + std::to_string(h.version));
    }
    if (h.count == 0 || h.count > kMaxRecords) {
      throw Error(ErrorCode::CountOutOfRange, "packet at offset " + std::to_string(offset) +
                                                  " has count " + std::to_string(h.count));
    }
    const std::size_t expected = kHeaderSize + kRecordSize * h.count;
    if (remaining < expected) {
      throw Error(ErrorCode::TruncatedPacket,
                  "packet at offset " + std::to_string(offset) + " needs " +
                      std::to_string(expected) + " bytes, has " + std::to_string(remaining));
    }
    h.sys_uptime_ms = reader.u32();
    h.unix_secs = reader.u32();
    h.unix_nsecs = reader.u32();
    h.flow_sequence = reader.u32();
    h.engine_type = reader.u8();
    h.engine_id = reader.u8();
    h.sampling = reader.u16();

    packet.records.resize(h.count);
    for (auto& r : packet.records) {
      r.srcaddr = Ipv4(reader.u32());
      r.dstaddr = Ipv4(reader.u32());
      r.nexthop = Ipv4(reader.u32());
      r.input = reader.u16();
      r.output = reader.u16();
      r.packets = reader.u32();
      r.octets = reader.u32();
      r.first_ms = reader.u32();
      r.last_ms = reader.u32();
      r.srcport = reader.u16();
      r.dstport = reader.u16();
      r.pad1 = reader.u8();
      r.tcp_flags = reader.u8();
      r.protocol = reader.u8();
      r.tos = reader.u8();
      r.src_as = reader.u16();
      r.dst_as = reader.u16();
      r.src_mask = reader.u8();
      r.dst_mask = reader.u8();
      r.pad2 = reader.u16();
    }
    packets.push_back(std::move(packet));
    offset += expected;
  }
  return packets;
}

/// Inverse of parse(). The header count is written as given, so a caller can
/// build deliberately malformed packets for testing.
inline void serialize(const Packet& packet, std::vector<std::uint8_t>& out) {
  detail::Writer w(out);
  const auto& h = packet.header;
  w.u16(h.version);
  w.u16(h.count);
  w.u32(h.sys_uptime_ms);
  w.u32(h.unix_secs);
  w.u32(h.unix_nsecs);
  w.u32(h.flow_sequence);
  w.u8(h.engine_type);
  w.u8(h.engine_id);
  w.u16(h.sampling);
  for (const auto& r : packet.records) {
    w.u32(r.srcaddr.value());
    w.u32(r.dstaddr.value());
    w.u32(r.nexthop.value());
    w.u16(r.input);
    w.u16(r.output);
    w.u32(r.packets);
    w.u32(r.octets);
    w.u32(r.first_ms);
    w.u32(r.last_ms);
    w.u16(r.srcport);
    w.u16(r.dstport);
    w.u8(r.pad1);
    w.u8(r.tcp_flags);
    w.u8(r.protocol);
    w.u8(r.tos);
    w.u16(r.src_as);
    w.u16(r.dst_as);
    w.u8(r.src_mask);
    w.u8(r.dst_mask);
    w.u16(r.pad2);
  }
}

inline std::vector<std::uint8_t> serialize(std::span<const Packet> packets) {
  std::vector<std::uint8_t> out;
  for (const auto& p : packets) serialize(p, out);
  return out;
}

namespace detail {

using FiveTuple = std::tuple<std::uint32_t, std::uint16_t, std::uint32_t, std::uint16_t, std::uint8_t>;

inline FiveTuple key_of(const Record& r) {
  return {r.srcaddr.value(), r.srcport, r.dstaddr.value(), r.dstport, r.protocol};
}

inline FiveTuple reversed_key_of(const Record& r) {
  return {r.dstaddr.value(), r.dstport, r.srcaddr.value(), r.srcport, r.protocol};
}

// Total order over records: start, end, 5-tuple, then everything else so
// that fully tied records are interchangeable.
inline auto visit_key(const Record& r) {
  return std::make_tuple(r.first_ms, r.last_ms, key_of(r), r.packets, r.octets,
                         r.nexthop.value(), r.input, r.output, r.tcp_flags, r.tos,
                         r.src_as, r.dst_as, r.src_mask, r.dst_mask, r.pad1, r.pad2);
}

inline RawFlow make_flow(const Record& fwd, const Record* rev) {
  RawFlow flow;
  flow.src_ip = fwd.srcaddr;
  flow.src_port = fwd.srcport;
  flow.dst_ip = fwd.dstaddr;
  flow.dst_port = fwd.dstport;
  flow.protocol = fwd.protocol;
  flow.src_pkts = fwd.packets;
  flow.src_ip_bytes = fwd.octets;
  std::int64_t first = fwd.first_ms;
  std::int64_t last = fwd.last_ms;
  if (rev != nullptr) {
    flow.dst_pkts = rev->packets;
    flow.dst_ip_bytes = rev->octets;
    first = std::min<std::int64_t>(first, rev->first_ms);
    last = std::max<std::int64_t>(last, rev->last_ms);
  }
  flow.duration = static_cast<double>(std::max<std::int64_t>(0, last - first)) / 1000.0;
  return flow;
}

}  // namespace detail

/// Merges unidirectional records into bidirectional flows.
///
/// Records are visited in (first_ms, 5-tuple) order. A record pairs with the
/// earliest still-unmatched record of the reversed 5-tuple whose interval,
/// widened by `idle_window_s` on the end, covers its start. The earlier record
/// becomes the forward direction. Records left over become flows with zero
/// reverse counters. Output follows the visiting order of forward records.
inline std::vector<RawFlow> pair_unidirectional(std::span<const Record> records,
                                                double idle_window_s = kDefaultIdleWindowSeconds) {
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = records[a];
    const auto& rb = records[b];
    return detail::visit_key(ra) < detail::visit_key(rb);
  });

  const auto window_ms = static_cast<std::int64_t>(idle_window_s * 1000.0);
  std::vector<std::ptrdiff_t> partner(records.size(), -1);
  std::vector<bool> is_reverse(records.size(), false);
  std::map<detail::FiveTuple, std::deque<std::size_t>> pending;

  for (const auto idx : order) {
    const auto& rec = records[idx];
    auto it = pending.find(detail::reversed_key_of(rec));
    bool matched = false;
    if (it != pending.end()) {
      auto& queue = it->second;
      const std::int64_t start = rec.first_ms;
      // Records in the queue arrive in start order; anything whose window has
      // closed can never match a later record either.
      for (auto q = queue.begin(); q != queue.end();) {
        const std::int64_t horizon = std::int64_t{records[*q].last_ms} + window_ms;
        if (horizon < start) {
          q = queue.erase(q);
          continue;
        }
        partner[*q] = static_cast<std::ptrdiff_t>(idx);
        partner[idx] = static_cast<std::ptrdiff_t>(*q);
        is_reverse[idx] = true;
        queue.erase(q);
        matched = true;
        break;
      }
      if (queue.empty()) pending.erase(it);
    }
    if (!matched) pending[detail::key_of(rec)].push_back(idx);
  }

  std::vector<RawFlow> flows;
  flows.reserve(records.size());
  for (const auto idx : order) {
    if (is_reverse[idx]) continue;
    const Record* rev = partner[idx] >= 0 ? &records[static_cast<std::size_t>(partner[idx])] : nullptr;
    flows.push_back(detail::make_flow(records[idx], rev));
  }
  return flows;
}

inline std::vector<Record> all_records(std::span<const Packet> packets) {
  std::vector<Record> out;
  for (const auto& p : packets) out.insert(out.end(), p.records.begin(), p.records.end());
  return out;
}

}  // namespace flowgnn::netflow_v5
