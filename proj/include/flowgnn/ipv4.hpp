#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "flowgnn/error.hpp"

namespace flowgnn {

/// IPv4 address held in host byte order.
class Ipv4 {
 public:
  constexpr Ipv4() = default;
  constexpr explicit Ipv4(std::uint32_t value) : value_(value) {}
  constexpr Ipv4(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d)
      : value_((std::uint32_t{a} << 24) | (std::uint32_t{b} << 16) | (std::uint32_t{c} << 8) | d) {}

  constexpr std::uint32_t value() const { return value_; }

  /// Parses dotted-quad notation. Anything containing ':' is reported as
  /// IPv6 so callers can tell "wrong family" apart from "garbage".
  static Ipv4 parse(std::string_view text) {
    if (text.find(':') != std::string_view::npos) {
      throw Error(ErrorCode::Ipv6Unsupported, "IPv6 address '" + std::string(text) + "'");
    }
    std::uint32_t value = 0;
    const char* p = text.data();
    const char* end = text.data() + text.size();
    for (int octet = 0; octet < 4; ++octet) {
      if (octet > 0) {
        if (p == end || *p != '.') break;
        ++p;
      }
      unsigned part = 0;
      auto [next, ec] = std::from_chars(p, end, part);
      if (ec != std::errc{} || part > 255 || next - p > 3) {
        throw Error(ErrorCode::MalformedRow, "invalid IPv4 address '" + std::string(text) + "'");
      }
      value = (value << 8) | part;
      p = next;
      if (octet == 3 && p == end) return Ipv4(value);
    }
    throw Error(ErrorCode::MalformedRow, "invalid IPv4 address '" + std::string(text) + "'");
  }

  std::string to_string() const {
    return std::to_string(value_ >> 24) + '.' + std::to_string((value_ >> 16) & 0xff) + '.' +
           std::to_string((value_ >> 8) & 0xff) + '.' + std::to_string(value_ & 0xff);
  }

  friend constexpr auto operator<=>(const Ipv4&, const Ipv4&) = default;

 private:
  std::uint32_t value_ = 0;
};

/// An IPv4 CIDR block such as 192.168.1.0/24.
class Cidr {
 public:
  constexpr Cidr() = default;
  Cidr(Ipv4 network, int prefix) : prefix_(prefix) {
    if (prefix < 0 || prefix > 32) {
      throw Error(ErrorCode::InvalidConfig, "CIDR prefix out of range: " + std::to_string(prefix));
    }
    network_ = Ipv4(network.value() & mask());
  }

  static Cidr parse(std::string_view text) {
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) return Cidr(parse_address(text), 32);
    int prefix = -1;
    const auto digits = text.substr(slash + 1);
    auto [next, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), prefix);
    if (ec != std::errc{} || next != digits.data() + digits.size()) {
      throw Error(ErrorCode::InvalidConfig, "invalid CIDR '" + std::string(text) + "'");
    }
    return Cidr(parse_address(text.substr(0, slash)), prefix);
  }

  constexpr std::uint32_t mask() const {
    return prefix_ == 0 ? 0u : ~std::uint32_t{0} << (32 - prefix_);
  }

  constexpr bool contains(Ipv4 address) const {
    return (address.value() & mask()) == network_.value();
  }

  constexpr Ipv4 network() const { return network_; }
  constexpr int prefix() const { return prefix_; }
  constexpr std::uint64_t size() const { return std::uint64_t{1} << (32 - prefix_); }

  std::string to_string() const { return network_.to_string() + '/' + std::to_string(prefix_); }

 private:
  static Ipv4 parse_address(std::string_view text) {
    try {
      return Ipv4::parse(text);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Ipv6Unsupported) throw;
      throw Error(ErrorCode::InvalidConfig, "invalid CIDR address '" + std::string(text) + "'");
    }
  }

  Ipv4 network_{};
  int prefix_ = 32;
};

}  // namespace flowgnn
