#pragma once

#include <array>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "flowgnn/error.hpp"
#include "flowgnn/flow.hpp"
#include "flowgnn/text.hpp"

namespace flowgnn {

inline constexpr int kEdgeFeatureDim = 10;

/// Normalized per-flow edge representation.
///
///   [0..4]  erf-normalized duration, src_pkts, src_ip_bytes, dst_pkts, dst_ip_bytes
///   [5..7]  tcp / udp / icmp flags
///   [8]     duration == 0 flag
///   [9]     constant 1, summed into the node degree feature
struct EdgeFeatures {
  std::array<double, kEdgeFeatureDim> values{};

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  bool tcp() const { return values[5] != 0.0; }
  bool udp() const { return values[6] != 0.0; }
  bool icmp() const { return values[7] != 0.0; }
  bool zero_duration() const { return values[8] != 0.0; }

  friend bool operator==(const EdgeFeatures&, const EdgeFeatures&) = default;
};

/// Scale of each normalized quantity. The erf argument is value/k, so k sits
/// where the output reaches erf(1) ~ 0.84.
struct NormCoefficients {
  double duration = 600.0;
  double src_pkts = 20.0;
  double src_ip_bytes = 900.0;
  double dst_pkts = 20.0;
  double dst_ip_bytes = 900.0;
  double degree = 1000.0;

  void validate() const {
    for (double k : {duration, src_pkts, src_ip_bytes, dst_pkts, dst_ip_bytes, degree}) {
      if (!(k > 0.0) || !std::isfinite(k)) {
        throw Error(ErrorCode::InvalidConfig, "normalization coefficients must be positive");
      }
    }
  }
};

inline double erf_norm(double x, double k) {
  if (!(x >= 0.0)) throw Error(ErrorCode::DomainError, "erf_norm: negative or NaN input");
  if (!(k > 0.0)) throw Error(ErrorCode::DomainError, "erf_norm: coefficient must be positive");
  return std::erf(x / k);
}

struct ProtocolFlags {
  bool tcp = false;
  bool udp = false;
  bool icmp = false;

  friend bool operator==(const ProtocolFlags&, const ProtocolFlags&) = default;
};

constexpr ProtocolFlags protocol_flags(std::uint8_t proto) {
  return {proto == protocol::kTcp, proto == protocol::kUdp, proto == protocol::kIcmp};
}

inline EdgeFeatures derive(const RawFlow& flow, const NormCoefficients& k = {}) {
  EdgeFeatures e;
  e[0] = erf_norm(flow.duration, k.duration);
  e[1] = erf_norm(static_cast<double>(flow.src_pkts), k.src_pkts);
  e[2] = erf_norm(static_cast<double>(flow.src_ip_bytes), k.src_ip_bytes);
  e[3] = erf_norm(static_cast<double>(flow.dst_pkts), k.dst_pkts);
  e[4] = erf_norm(static_cast<double>(flow.dst_ip_bytes), k.dst_ip_bytes);
  const auto flags = protocol_flags(flow.protocol);
  e[5] = flags.tcp ? 1.0 : 0.0;
  e[6] = flags.udp ? 1.0 : 0.0;
  e[7] = flags.icmp ? 1.0 : 0.0;
  e[8] = flow.duration == 0.0 ? 1.0 : 0.0;
  e[9] = 1.0;
  return e;
}

struct ProtocolSplit {
  std::vector<RawFlow> tcp;
  std::vector<RawFlow> udp;
  std::vector<RawFlow> icmp;
  std::vector<RawFlow> other;
};

inline ProtocolSplit split_by_protocol(const std::vector<RawFlow>& flows) {
  ProtocolSplit out;
  for (const auto& f : flows) {
    const auto flags = protocol_flags(f.protocol);
    if (flags.tcp) {
      out.tcp.push_back(f);
    } else if (flags.udp) {
      out.udp.push_back(f);
    } else if (flags.icmp) {
      out.icmp.push_back(f);
    } else {
      out.other.push_back(f);
    }
  }
  return out;
}

/// f1..f10, label, attack_type per flow.
inline void write_feature_csv(std::ostream& out, const std::vector<RawFlow>& flows, const NormCoefficients& k = {}) {
  for (int i = 1; i <= kEdgeFeatureDim; ++i) out << 'f' << i << ',';
  out << "label,attack_type\n";
  for (const auto& flow : flows) {
    const auto e = derive(flow, k);
    for (double v : e.values) out << text::format_double(v) << ',';
    out << int(flow.label) << ',' << to_string(flow.attack_type) << '\n';
  }
}

}  // namespace flowgnn
