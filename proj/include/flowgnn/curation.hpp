#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowgnn/error.hpp"
#include "flowgnn/flow.hpp"
#include "flowgnn/ipv4.hpp"

namespace flowgnn {

/// Count per attack type plus total.
struct ClassCounts {
  std::array<std::uint64_t, kNumAttackTypes> counts{};

  std::uint64_t operator[](AttackType t) const { return counts[class_index(t)]; }
  std::uint64_t total() const {
    std::uint64_t sum = 0;
    for (auto c : counts) sum += c;
    return sum;
  }

  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

inline ClassCounts summarize(const std::vector<RawFlow>& flows) {
  ClassCounts out;
  for (const auto& f : flows) ++out.counts[class_index(f.attack_type)];
  return out;
}

struct CurationConfig {
  std::vector<Cidr> testbed_subnets;
  std::vector<Ipv4> infra_hosts = {Ipv4(192, 168, 1, 1)};
  std::vector<std::uint16_t> infra_ports = {53};
  bool dedupe = true;
};

struct CurationReport {
  std::uint64_t input_count = 0;
  std::uint64_t kept_count = 0;
  std::uint64_t dropped_outside = 0;
  std::uint64_t relabeled_infra = 0;
  std::uint64_t dropped_duplicates = 0;
  ClassCounts per_class_before;
  ClassCounts per_class_after;

  friend bool operator==(const CurationReport&, const CurationReport&) = default;
};

struct CurationResult {
  std::vector<RawFlow> flows;
  CurationReport report;
};

namespace detail {

inline bool inside_any(const std::vector<Cidr>& subnets, Ipv4 ip) {
  return std::any_of(subnets.begin(), subnets.end(), [&](const Cidr& c) { return c.contains(ip); });
}

// Flow content that must agree for two records to count as duplicates:
// endpoints, protocol and the five counters. Label and type are excluded.
inline auto duplicate_key(const RawFlow& f) {
  return std::make_tuple(f.src_ip.value(), f.src_port, f.dst_ip.value(), f.dst_port, f.protocol,
                         f.duration, f.src_pkts, f.src_ip_bytes, f.dst_pkts, f.dst_ip_bytes);
}

}  // namespace detail

/// Cleans a labelled flow list in three ordered passes.
///
///  1. Attack-labelled flows with either endpoint outside every testbed
///     subnet are dropped.
///  2. Attack-labelled flows talking to an infrastructure host on an
///     infrastructure port (either direction) are relabelled benign.
///  3. With `dedupe`, groups of flows with identical content but more than
///     one attack type are dropped entirely.
///
/// Kept flows retain their input order.
inline CurationResult curate(const std::vector<RawFlow>& flows, const CurationConfig& config) {
  if (config.testbed_subnets.empty()) {
    throw Error(ErrorCode::EmptySubnetList, "curation requires at least one testbed subnet");
  }
  const std::set<std::uint32_t> infra_hosts = [&] {
    std::set<std::uint32_t> s;
    for (auto h : config.infra_hosts) s.insert(h.value());
    return s;
  }();
  const std::set<std::uint16_t> infra_ports(config.infra_ports.begin(), config.infra_ports.end());
  auto is_infra = [&](Ipv4 ip, std::uint16_t port) {
    return infra_hosts.count(ip.value()) != 0 && infra_ports.count(port) != 0;
  };

  CurationResult result;
  auto& report = result.report;
  report.input_count = flows.size();
  report.per_class_before = summarize(flows);

  std::vector<RawFlow> stage;
  stage.reserve(flows.size());
  for (const auto& flow : flows) {
    if (flow.is_attack() && !(detail::inside_any(config.testbed_subnets, flow.src_ip) &&
                              detail::inside_any(config.testbed_subnets, flow.dst_ip))) {
      ++report.dropped_outside;
      continue;
    }
    RawFlow kept = flow;
    if (kept.is_attack() && (is_infra(kept.dst_ip, kept.dst_port) || is_infra(kept.src_ip, kept.src_port))) {
      set_attack_type(kept, AttackType::Benign);
      ++report.relabeled_infra;
    }
    stage.push_back(kept);
  }

  if (config.dedupe) {
    using Key = decltype(detail::duplicate_key(stage.front()));
    std::map<Key, std::uint16_t> types_seen;  // bitmask of attack types per key
    for (const auto& f : stage) types_seen[detail::duplicate_key(f)] |= std::uint16_t(1u << class_index(f.attack_type));
    auto conflicting = [&](const RawFlow& f) {
      const auto mask = types_seen[detail::duplicate_key(f)];
      return (mask & (mask - 1)) != 0;
    };
    for (const auto& f : stage) {
      if (conflicting(f)) {
        ++report.dropped_duplicates;
      } else {
        result.flows.push_back(f);
      }
    }
  } else {
    result.flows = std::move(stage);
  }

  report.kept_count = result.flows.size();
  report.per_class_after = summarize(result.flows);
  return result;
}

inline nlohmann::ordered_json to_json(const ClassCounts& counts) {
  nlohmann::ordered_json j;
  for (int i = 0; i < kNumAttackTypes; ++i) j[std::string(kAttackTypeNames[i])] = counts.counts[i];
  j["total"] = counts.total();
  return j;
}

inline nlohmann::ordered_json to_json(const CurationReport& r) {
  nlohmann::ordered_json j;
  j["input_count"] = r.input_count;
  j["kept_count"] = r.kept_count;
  j["dropped_outside"] = r.dropped_outside;
  j["relabeled_infra"] = r.relabeled_infra;
  j["dropped_duplicates"] = r.dropped_duplicates;
  j["per_class_before"] = to_json(r.per_class_before);
  j["per_class_after"] = to_json(r.per_class_after);
  return j;
}

/// One row per category plus a "Total Size" row, columns before/after.
inline void write_report_csv(std::ostream& out, const CurationReport& r) {
  out << "category,before,after\n";
  for (int i = 0; i < kNumAttackTypes; ++i) {
    out << kAttackTypeNames[i] << ',' << r.per_class_before.counts[i] << ',' << r.per_class_after.counts[i] << '\n';
  }
  out << "Total Size," << r.per_class_before.total() << ',' << r.per_class_after.total() << '\n';
}

}  // namespace flowgnn
