#include <gtest/gtest.h>

#include "flowgnn/ipv4.hpp"

using flowgnn::Cidr;
using flowgnn::Error;
using flowgnn::ErrorCode;
using flowgnn::Ipv4;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IoError;
}

}  // namespace

TEST(Ipv4, ParsesDottedQuad) {
  EXPECT_EQ(Ipv4::parse("192.168.1.31"), Ipv4(192, 168, 1, 31));
  EXPECT_EQ(Ipv4::parse("0.0.0.0").value(), 0u);
  EXPECT_EQ(Ipv4::parse("255.255.255.255").value(), 0xffffffffu);
}

TEST(Ipv4, RoundTripsThroughText) {
  for (std::uint32_t v : {0u, 1u, 0x0a000001u, 0xc0a80101u, 0xffffffffu}) {
    EXPECT_EQ(Ipv4::parse(Ipv4(v).to_string()).value(), v);
  }
}

TEST(Ipv4, RejectsGarbage) {
  for (const char* bad : {"", "1.2.3", "1.2.3.4.5", "256.1.1.1", "1.2.3.x", "a.b.c.d", "1..2.3", "1.2.3.4 5"}) {
    EXPECT_EQ(code_of([&] { Ipv4::parse(bad); }), ErrorCode::MalformedRow) << bad;
  }
}

TEST(Ipv4, ReportsIpv6Distinctly) {
  EXPECT_EQ(code_of([] { Ipv4::parse("fe80::1"); }), ErrorCode::Ipv6Unsupported);
  EXPECT_EQ(code_of([] { Ipv4::parse("::ffff:10.0.0.1"); }), ErrorCode::Ipv6Unsupported);
}

TEST(Cidr, ContainsAddressesInBlock) {
  const auto c = Cidr::parse("192.168.1.0/24");
  EXPECT_TRUE(c.contains(Ipv4(192, 168, 1, 0)));
  EXPECT_TRUE(c.contains(Ipv4(192, 168, 1, 255)));
  EXPECT_FALSE(c.contains(Ipv4(192, 168, 2, 1)));
  EXPECT_EQ(c.size(), 256u);
}

TEST(Cidr, NormalizesHostBits) {
  const auto c = Cidr::parse("10.1.2.3/8");
  EXPECT_EQ(c.network(), Ipv4(10, 0, 0, 0));
  EXPECT_EQ(c.to_string(), "10.0.0.0/8");
}

TEST(Cidr, EdgePrefixes) {
  EXPECT_TRUE(Cidr::parse("0.0.0.0/0").contains(Ipv4(8, 8, 8, 8)));
  const auto host = Cidr::parse("192.168.1.1");
  EXPECT_EQ(host.prefix(), 32);
  EXPECT_TRUE(host.contains(Ipv4(192, 168, 1, 1)));
  EXPECT_FALSE(host.contains(Ipv4(192, 168, 1, 2)));
}

TEST(Cidr, RejectsInvalidPrefix) {
  for (const char* bad : {"10.0.0.0/33", "10.0.0.0/-1", "10.0.0.0/", "10.0.0.0/8x", "10.0.0/8"}) {
    EXPECT_EQ(code_of([&] { Cidr::parse(bad); }), ErrorCode::InvalidConfig) << bad;
  }
}
