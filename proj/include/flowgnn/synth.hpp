#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

#include "flowgnn/error.hpp"
#include "flowgnn/flow.hpp"
#include "flowgnn/ipv4.hpp"
#include "flowgnn/random.hpp"

// Deterministic synthetic traffic with five classes whose separation needs
// graph structure. DDoS and scan flows share the same single-packet
// signature; only the shape of the neighborhood (one hub receiving from many
// sources vs. one hub sending to many targets) tells them apart.

namespace flowgnn::synth {

struct SynthConfig {
  std::uint64_t seed = 0;
  std::uint64_t n_benign = 0;
  std::uint64_t n_ddos = 0;
  std::uint64_t n_scan = 0;
  std::uint64_t n_password = 0;
  std::uint64_t n_dos = 0;
  Cidr subnet = Cidr(Ipv4(192, 168, 1, 0), 24);

  std::uint64_t total() const { return n_benign + n_ddos + n_scan + n_password + n_dos; }

  void validate() const {
    if (total() == 0) throw Error(ErrorCode::InvalidConfig, "synth needs at least one flow");
    if (subnet.prefix() > 28) throw Error(ErrorCode::InvalidConfig, "synth subnet must be /28 or larger");
  }
};

namespace detail {

inline constexpr std::array<std::uint16_t, 6> kTcpServices = {80, 443, 22, 8080, 445, 3389};
inline constexpr std::array<std::uint16_t, 2> kUdpServices = {53, 123};

class Generator {
 public:
  explicit Generator(const SynthConfig& c) : config_(c), rng_(stream_id(c.seed, 0x73796e74ull /* "synt" */)) {
    // Five distinct hosts play the attack roles; everyone else is a
    // regular client or server.
    const std::uint64_t usable = config_.subnet.size() - 3;  // skip network, .1 (gateway), broadcast
    std::vector<std::uint64_t> offsets(usable);
    for (std::uint64_t i = 0; i < usable; ++i) offsets[i] = i + 2;
    shuffle(offsets, rng_);
    for (std::size_t i = 0; i < roles_.size(); ++i) roles_[i] = host(offsets[i]);
    for (std::size_t i = roles_.size(); i < offsets.size(); ++i) regular_.push_back(host(offsets[i]));
  }

  std::vector<RawFlow> run() {
    std::vector<RawFlow> flows;
    flows.reserve(config_.total());
    for (std::uint64_t i = 0; i < config_.n_benign; ++i) flows.push_back(benign());
    for (std::uint64_t i = 0; i < config_.n_ddos; ++i) flows.push_back(ddos());
    for (std::uint64_t i = 0; i < config_.n_scan; ++i) flows.push_back(scan());
    for (std::uint64_t i = 0; i < config_.n_password; ++i) flows.push_back(password());
    for (std::uint64_t i = 0; i < config_.n_dos; ++i) flows.push_back(dos());
    shuffle(flows, rng_);
    return flows;
  }

 private:
  enum Role { DdosVictim, Scanner, PasswordVictim, DosAttacker, DosVictim };

  Ipv4 host(std::uint64_t offset) const {
    return Ipv4(config_.subnet.network().value() + static_cast<std::uint32_t>(offset));
  }
  Ipv4 regular_host() { return regular_[rng_.below(regular_.size())]; }
  std::uint16_t ephemeral_port() { return static_cast<std::uint16_t>(rng_.between(49152, 65535)); }
  std::uint64_t bytes_for(std::uint64_t pkts, std::uint64_t lo, std::uint64_t hi) {
    std::uint64_t total = 0;
    for (std::uint64_t i = 0; i < pkts; ++i) total += rng_.between(lo, hi);
    return total;
  }

  RawFlow base(Ipv4 src, std::uint16_t sport, Ipv4 dst, std::uint16_t dport, std::uint8_t proto, AttackType type) {
    RawFlow f;
    f.src_ip = src;
    f.src_port = sport;
    f.dst_ip = dst;
    f.dst_port = dport;
    f.protocol = proto;
    set_attack_type(f, type);
    return f;
  }

  // Moderate client/server exchanges inside the testbed.
  RawFlow benign() {
    const bool udp = rng_.uniform() < 0.3;
    Ipv4 client = regular_host();
    Ipv4 server = regular_host();
    while (server == client) server = regular_host();
    const std::uint16_t port =
        udp ? kUdpServices[rng_.below(kUdpServices.size())] : kTcpServices[rng_.below(kTcpServices.size())];
    auto f = base(client, ephemeral_port(), server, port, udp ? protocol::kUdp : protocol::kTcp, AttackType::Benign);
    f.duration = rng_.uniform(1.0, 300.0);
    f.src_pkts = rng_.between(2, 50);
    f.dst_pkts = rng_.between(2, 50);
    f.src_ip_bytes = bytes_for(f.src_pkts, 60, 1400);
    f.dst_ip_bytes = bytes_for(f.dst_pkts, 60, 1400);
    return f;
  }

  // Many sources, one victim web port, SYN-sized packets.
  RawFlow ddos() {
    auto f = base(regular_host(), ephemeral_port(), roles_[DdosVictim], 80, protocol::kTcp, AttackType::Ddos);
    f.src_pkts = rng_.uniform() < 0.6 ? 1 : rng_.between(2, 3);
    f.duration = f.src_pkts == 1 ? 0.0 : rng_.uniform(0.001, 0.2);
    f.src_ip_bytes = bytes_for(f.src_pkts, 40, 60);
    f.dst_pkts = rng_.uniform() < 0.7 ? 0 : 1;
    f.dst_ip_bytes = bytes_for(f.dst_pkts, 40, 60);
    return f;
  }

  // One scanner socket probing many ports, one packet each.
  RawFlow scan() {
    auto f = base(roles_[Scanner], 40000, regular_host(), static_cast<std::uint16_t>(rng_.between(1, 1024)),
                  protocol::kTcp, AttackType::Scanning);
    f.duration = 0.0;
    f.src_pkts = 1;
    f.src_ip_bytes = bytes_for(1, 40, 60);
    f.dst_pkts = rng_.uniform() < 0.5 ? 0 : 1;
    f.dst_ip_bytes = bytes_for(f.dst_pkts, 40, 60);
    return f;
  }

  // A few hosts hammering one SSH service with short login exchanges.
  RawFlow password() {
    const Ipv4 src = regular_[rng_.below(std::min<std::size_t>(3, regular_.size()))];
    auto f = base(src, ephemeral_port(), roles_[PasswordVictim], 22, protocol::kTcp, AttackType::Password);
    f.duration = rng_.uniform(0.5, 5.0);
    f.src_pkts = rng_.between(8, 20);
    f.dst_pkts = rng_.between(8, 20);
    f.src_ip_bytes = bytes_for(f.src_pkts, 60, 120);
    f.dst_ip_bytes = bytes_for(f.dst_pkts, 60, 200);
    return f;
  }

  // One attacker, one victim, long floods with little reply traffic.
  RawFlow dos() {
    auto f = base(roles_[DosAttacker], ephemeral_port(), roles_[DosVictim], 443, protocol::kTcp, AttackType::Dos);
    f.duration = rng_.uniform(30.0, 600.0);
    f.src_pkts = rng_.between(200, 5000);
    f.src_ip_bytes = f.src_pkts * rng_.between(60, 1400);
    f.dst_pkts = rng_.between(0, 5);
    f.dst_ip_bytes = bytes_for(f.dst_pkts, 40, 60);
    return f;
  }

  SynthConfig config_;
  Rng rng_;
  std::array<Ipv4, 5> roles_{};
  std::vector<Ipv4> regular_;
};

}  // namespace detail

/// Same config, same flows.
inline std::vector<RawFlow> generate(const SynthConfig& config) {
  config.validate();
  return detail::Generator(config).run();
}

}  // namespace flowgnn::synth
