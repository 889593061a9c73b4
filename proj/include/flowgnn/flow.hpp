#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "flowgnn/error.hpp"
#include "flowgnn/ipv4.hpp"

namespace flowgnn {

/// Traffic categories. The numeric value doubles as the class index used by
/// the classifier and the metrics.
enum class AttackType : std::uint8_t {
  Benign = 0,
  Backdoor,
  Ddos,
  Dos,
  Injection,
  Mitm,
  Ransomware,
  Password,
  Scanning,
  Xss,
};

inline constexpr int kNumAttackTypes = 10;

inline constexpr std::array<std::string_view, kNumAttackTypes> kAttackTypeNames = {
    "benign", "backdoor", "ddos",     "dos",      "injection",
    "mitm",   "ransomware", "password", "scanning", "xss"};

constexpr std::string_view to_string(AttackType type) {
  return kAttackTypeNames[static_cast<std::size_t>(type)];
}

constexpr int class_index(AttackType type) { return static_cast<int>(type); }

inline AttackType attack_type_from_index(int index) {
  if (index < 0 || index >= kNumAttackTypes) {
    throw Error(ErrorCode::UnknownClass, "class index " + std::to_string(index));
  }
  return static_cast<AttackType>(index);
}

/// Case-insensitive lookup. ToN-IoT spells the benign class "normal".
inline std::optional<AttackType> parse_attack_type(std::string_view text) {
  std::string lowered(text);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lowered == "normal") return AttackType::Benign;
  for (int i = 0; i < kNumAttackTypes; ++i) {
    if (kAttackTypeNames[i] == lowered) return static_cast<AttackType>(i);
  }
  return std::nullopt;
}

namespace protocol {
inline constexpr std::uint8_t kIcmp = 1;
inline constexpr std::uint8_t kTcp = 6;
inline constexpr std::uint8_t kUdp = 17;
inline constexpr std::uint8_t kUnknown = 255;
}  // namespace protocol

/// One bidirectional flow record. The forward direction is src -> dst.
struct RawFlow {
  Ipv4 src_ip;
  std::uint16_t src_port = 0;
  Ipv4 dst_ip;
  std::uint16_t dst_port = 0;
  std::uint8_t protocol = 0;
  double duration = 0.0;  // seconds
  std::uint64_t src_pkts = 0;
  std::uint64_t src_ip_bytes = 0;
  std::uint64_t dst_pkts = 0;
  std::uint64_t dst_ip_bytes = 0;
  std::uint8_t label = 0;
  AttackType attack_type = AttackType::Benign;

  bool is_attack() const { return label != 0; }

  friend bool operator==(const RawFlow&, const RawFlow&) = default;
};

/// Returns a description of the first violated invariant, or nothing.
inline std::optional<std::string> check_invariants(const RawFlow& flow) {
  if ((flow.label == 0) != (flow.attack_type == AttackType::Benign)) {
    return "label " + std::to_string(flow.label) + " inconsistent with attack type " +
           std::string(to_string(flow.attack_type));
  }
  if (flow.label > 1) return "label must be 0 or 1";
  if (!std::isfinite(flow.duration) || flow.duration < 0.0) return "duration must be finite and >= 0";
  if (flow.src_pkts == 0 && flow.src_ip_bytes != 0) return "src_ip_bytes > 0 with zero src_pkts";
  if (flow.dst_pkts == 0 && flow.dst_ip_bytes != 0) return "dst_ip_bytes > 0 with zero dst_pkts";
  return std::nullopt;
}

inline void set_attack_type(RawFlow& flow, AttackType type) {
  flow.attack_type = type;
  flow.label = type == AttackType::Benign ? 0 : 1;
}

}  // namespace flowgnn
