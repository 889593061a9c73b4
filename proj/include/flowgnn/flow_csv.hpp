#pragma once

#include <array>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "flowgnn/error.hpp"
#include "flowgnn/flow.hpp"
#include "flowgnn/text.hpp"

namespace flowgnn::csv {

enum class Field {
  SrcIp,
  SrcPort,
  DstIp,
  DstPort,
  Protocol,
  Duration,
  SrcPkts,
  SrcIpBytes,
  DstPkts,
  DstIpBytes,
  Label,
  AttackType,
};

inline constexpr int kNumFields = 12;

/// Canonical column names, also used when writing.
inline constexpr std::array<std::string_view, kNumFields> kFieldNames = {
    "src_ip",  "src_port",     "dst_ip",   "dst_port",     "protocol", "duration",
    "src_pkts", "src_ip_bytes", "dst_pkts", "dst_ip_bytes", "label",    "attack_type"};

/// Maps each RawFlow field onto a column name in the input header.
struct Schema {
  std::array<std::string, kNumFields> columns;

  Schema() {
    for (int i = 0; i < kNumFields; ++i) columns[i] = std::string(kFieldNames[i]);
  }

  /// Column names of the ToN-IoT "Processed Network Dataset" files.
  static Schema ton_iot() {
    Schema s;
    s.set(Field::Protocol, "proto");
    s.set(Field::AttackType, "type");
    return s;
  }

  void set(Field field, std::string column) { columns[static_cast<int>(field)] = std::move(column); }
  const std::string& column(Field field) const { return columns[static_cast<int>(field)]; }

  /// Applies "field=column" overrides separated by commas, e.g.
  /// "protocol=proto,attack_type=type".
  void apply_overrides(std::string_view spec) {
    while (!spec.empty()) {
      const auto comma = spec.find(',');
      const auto item = text::trim(spec.substr(0, comma));
      spec = comma == std::string_view::npos ? std::string_view{} : spec.substr(comma + 1);
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) {
        throw Error(ErrorCode::InvalidConfig, "schema entry '" + std::string(item) + "' lacks '='");
      }
      set(field_from_name(text::trim(item.substr(0, eq))), std::string(text::trim(item.substr(eq + 1))));
    }
  }

  static Field field_from_name(std::string_view name) {
    for (int i = 0; i < kNumFields; ++i) {
      if (kFieldNames[i] == name) return static_cast<Field>(i);
    }
    throw Error(ErrorCode::InvalidConfig, "unknown flow field '" + std::string(name) + "'");
  }
};

struct SkippedRow {
  std::size_t row = 0;  // 1-based data row index
  std::string reason;
};

struct ReadResult {
  std::vector<RawFlow> flows;
  std::vector<SkippedRow> skipped;
};

/// "tcp"/"udp"/"icmp" in any case, or a decimal protocol number. Other
/// names map to 255.
inline std::uint8_t parse_protocol(std::string_view text) {
  if (auto number = text::parse_number<unsigned>(text)) {
    if (*number > 255) throw Error(ErrorCode::MalformedRow, "protocol number out of range");
    return static_cast<std::uint8_t>(*number);
  }
  std::string lowered(text::trim(text));
  for (auto& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lowered == "tcp") return protocol::kTcp;
  if (lowered == "udp") return protocol::kUdp;
  if (lowered == "icmp") return protocol::kIcmp;
  return protocol::kUnknown;
}

inline std::string protocol_text(std::uint8_t proto) {
  switch (proto) {
    case protocol::kTcp: return "tcp";
    case protocol::kUdp: return "udp";
    case protocol::kIcmp: return "icmp";
    default: return std::to_string(proto);
  }
}

namespace detail {

template <typename T>
T require_number(std::string_view s, std::string_view what) {
  auto v = text::parse_number<T>(s);
  if (!v) throw Error(ErrorCode::MalformedRow, "bad " + std::string(what) + " '" + std::string(s) + "'");
  return *v;
}

inline RawFlow parse_row(const std::vector<std::string>& fields, const std::array<std::size_t, kNumFields>& idx) {
  auto at = [&](Field f) -> const std::string& { return fields[idx[static_cast<int>(f)]]; };
  RawFlow flow;
  flow.src_ip = Ipv4::parse(at(Field::SrcIp));
  flow.dst_ip = Ipv4::parse(at(Field::DstIp));
  const auto src_port = require_number<unsigned>(at(Field::SrcPort), "src_port");
  const auto dst_port = require_number<unsigned>(at(Field::DstPort), "dst_port");
  if (src_port > 65535 || dst_port > 65535) throw Error(ErrorCode::MalformedRow, "port out of range");
  flow.src_port = static_cast<std::uint16_t>(src_port);
  flow.dst_port = static_cast<std::uint16_t>(dst_port);
  flow.protocol = parse_protocol(at(Field::Protocol));
  flow.duration = require_number<double>(at(Field::Duration), "duration");
  flow.src_pkts = require_number<std::uint64_t>(at(Field::SrcPkts), "src_pkts");
  flow.src_ip_bytes = require_number<std::uint64_t>(at(Field::SrcIpBytes), "src_ip_bytes");
  flow.dst_pkts = require_number<std::uint64_t>(at(Field::DstPkts), "dst_pkts");
  flow.dst_ip_bytes = require_number<std::uint64_t>(at(Field::DstIpBytes), "dst_ip_bytes");
  const auto label = require_number<unsigned>(at(Field::Label), "label");
  if (label > 1) throw Error(ErrorCode::MalformedRow, "label must be 0 or 1");
  flow.label = static_cast<std::uint8_t>(label);
  const auto type = parse_attack_type(text::trim(at(Field::AttackType)));
  if (!type) throw Error(ErrorCode::MalformedRow, "unknown attack type '" + at(Field::AttackType) + "'");
  flow.attack_type = *type;
  if (auto violation = check_invariants(flow)) throw Error(ErrorCode::MalformedRow, *violation);
  return flow;
}

}  // namespace detail

/// Reads a flow CSV with a header row. In strict mode the first malformed
/// row aborts with MalformedRow; in lenient mode it is skipped and recorded.
/// IPv6 rows are always fatal.
inline ReadResult read_flow_csv(std::istream& in, const Schema& schema = {}, bool lenient = false) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::MissingColumn, "input has no header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = text::split_csv_line(line);
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < header.size(); ++i) position.emplace(header[i], i);

  std::array<std::size_t, kNumFields> idx{};
  for (int f = 0; f < kNumFields; ++f) {
    auto it = position.find(schema.columns[f]);
    if (it == position.end()) {
      throw Error(ErrorCode::MissingColumn, "column '" + schema.columns[f] + "' (" +
                                                std::string(kFieldNames[f]) + ") not in header");
    }
    idx[f] = it->second;
  }

  ReadResult result;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    ++row;
    try {
      const auto fields = text::split_csv_line(line);
      if (fields.size() != header.size()) {
        throw Error(ErrorCode::MalformedRow, "expected " + std::to_string(header.size()) + " fields, got " +
                                                 std::to_string(fields.size()));
      }
      result.flows.push_back(detail::parse_row(fields, idx));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Ipv6Unsupported) {
        throw Error(ErrorCode::Ipv6Unsupported, "row " + std::to_string(row) + ": " + e.message());
      }
      if (!lenient) throw Error(ErrorCode::MalformedRow, "row " + std::to_string(row) + ": " + e.message());
      result.skipped.push_back({row, e.message()});
    }
  }
  return result;
}

inline std::string csv_header() {
  std::string out;
  for (int f = 0; f < kNumFields; ++f) {
    if (f) out += ',';
    out += kFieldNames[f];
  }
  return out;
}

inline std::string to_csv_row(const RawFlow& flow) {
  std::string out;
  out += flow.src_ip.to_string() + ',' + std::to_string(flow.src_port) + ',';
  out += flow.dst_ip.to_string() + ',' + std::to_string(flow.dst_port) + ',';
  out += protocol_text(flow.protocol) + ',' + text::format_double(flow.duration) + ',';
  out += std::to_string(flow.src_pkts) + ',' + std::to_string(flow.src_ip_bytes) + ',';
  out += std::to_string(flow.dst_pkts) + ',' + std::to_string(flow.dst_ip_bytes) + ',';
  out += std::to_string(flow.label) + ',' + std::string(to_string(flow.attack_type));
  return out;
}

/// Writes flows in the canonical schema; read_flow_csv reads it back exactly.
inline void write_flow_csv(std::ostream& out, const std::vector<RawFlow>& flows) {
  out << csv_header() << '\n';
  for (const auto& f : flows) out << to_csv_row(f) << '\n';
}

}  // namespace flowgnn::csv
