#include <gtest/gtest.h>

#include <algorithm>
#include <thread>

#include "iop/transport.hpp"

using namespace iop;
using namespace std::chrono;

namespace {

std::vector<std::string> drain(Transport& t) {
  std::vector<std::string> out;
  while (auto d = t.poll_receive()) out.push_back(d->payload);
  return out;
}

std::vector<TraceEntry> run_trace(SimConfig c) {
  SimNetwork net(c);
  auto a = net.bind({"a", 1});
  auto b = net.bind({"b", 1});
  for (int i = 0; i < 200; ++i) {
    a->send({"b", 1}, "m" + std::to_string(i));
    net.advance_to(net.now() + milliseconds(7));
  }
  return net.trace();
}

}  // namespace

TEST(Endpoint, Parse) {
  const auto e = Endpoint::parse("127.0.0.1:7001");
  EXPECT_EQ(e.host, "127.0.0.1");
  EXPECT_EQ(e.port, 7001);
  EXPECT_EQ(e.to_string(), "127.0.0.1:7001");
  for (const auto* bad : {"nohost", ":80", "h:", "h:70000", "h:x"})
    EXPECT_THROW(Endpoint::parse(bad), std::invalid_argument) << bad;
}

TEST(Sim, ReliableDeliversExactlyOnce) {
  SimNetwork net({0.0, 0.0, milliseconds(50), 1});
  auto a = net.bind({"a", 1});
  auto b = net.bind({"b", 1});
  for (int i = 0; i < 100; ++i) a->send({"b", 1}, std::to_string(i));
  EXPECT_TRUE(drain(*b).empty());
  net.advance_to(net.now() + milliseconds(50));
  auto got = drain(*b);
  std::sort(got.begin(), got.end());
  std::vector<std::string> want;
  for (int i = 0; i < 100; ++i) want.push_back(std::to_string(i));
  std::sort(want.begin(), want.end());
  EXPECT_EQ(got, want);
  EXPECT_EQ(net.in_flight(), 0u);
}

TEST(Sim, TotalLossStillSendsOk) {
  SimNetwork net({1.0, 0.0, milliseconds(0), 1});
  auto a = net.bind({"a", 1});
  auto b = net.bind({"b", 1});
  EXPECT_NO_THROW(a->send({"b", 1}, "payment"));
  net.advance_to(net.now() + hours(1));
  EXPECT_TRUE(drain(*b).empty());
  ASSERT_EQ(net.trace().size(), 1u);
  EXPECT_FALSE(net.trace()[0].delivered);
}

TEST(Sim, DuplicationDeliversTwice) {
  SimNetwork net({0.0, 1.0, milliseconds(0), 1});
  auto a = net.bind({"a", 1});
  auto b = net.bind({"b", 1});
  a->send({"b", 1}, "x");
  net.advance_to(net.now());
  EXPECT_EQ(drain(*b), (std::vector<std::string>{"x", "x"}));
}

TEST(Sim, ReordersWithDelay) {
  bool swapped = false;
  for (std::uint64_t seed = 0; seed < 20 && !swapped; ++seed) {
    SimNetwork net({0.0, 0.0, milliseconds(100), seed});
    auto a = net.bind({"a", 1});
    auto b = net.bind({"b", 1});
    a->send({"b", 1}, "first");
    a->send({"b", 1}, "second");
    net.advance_to(net.now() + milliseconds(100));
    const auto got = drain(*b);
    ASSERT_EQ(got.size(), 2u);
    swapped = got[0] == "second";
  }
  EXPECT_TRUE(swapped);
}

TEST(Sim, SameSeedSameTrace) {
  const SimConfig c{0.3, 0.1, milliseconds(40), 42};
  const auto first = run_trace(c);
  EXPECT_EQ(run_trace(c), first);
  auto other = c;
  other.seed = 43;
  EXPECT_NE(run_trace(other), first);
}

TEST(Sim, PayloadsNeverAltered) {
  SimNetwork net({0.2, 0.3, milliseconds(20), 9});
  auto a = net.bind({"a", 1});
  auto b = net.bind({"b", 1});
  const std::string payload("\x00\xff{\"k\":\"v\"}\n", 12);
  for (int i = 0; i < 50; ++i) a->send({"b", 1}, payload);
  net.advance_to(net.now() + seconds(1));
  for (const auto& p : drain(*b)) EXPECT_EQ(p, payload);
}

TEST(Sim, LocalFailures) {
  SimNetwork net({});
  auto a = net.bind({"a", 1});
  EXPECT_THROW(a->send({"nobody", 1}, "x"), TransportError);
  net.bind({"b", 1});  // dropped immediately
  EXPECT_THROW(a->send({"b", 1}, "x"), TransportError);
  EXPECT_THROW(net.bind({"a", 1}), TransportError);
  auto b = net.bind({"b", 1});
  EXPECT_THROW(a->send({"b", 1}, std::string(60001, 'x')), TransportError);
  EXPECT_THROW(SimNetwork({1.5, 0, {}, 0}), std::invalid_argument);
}

TEST(Sim, SourceIsReported) {
  SimNetwork net({});
  auto a = net.bind({"a", 1});
  auto b = net.bind({"b", 2});
  a->send({"b", 2}, "hi");
  net.advance_to(net.now());
  const auto d = b->poll_receive();
  ASSERT_TRUE(d);
  EXPECT_EQ(d->source, (Endpoint{"a", 1}));
  EXPECT_FALSE(b->poll_receive());
}

TEST(Udp, LoopbackFidelity) {
  UdpTransport a({"127.0.0.1", 0});
  UdpTransport b({"127.0.0.1", 0});
  ASSERT_NE(b.local_endpoint().port, 0);
  EXPECT_FALSE(b.poll_receive());
  const std::string payload = R"({"protocol":"Purchase","message":"Payment","system":"s","payload":{"paid":"10"}})";
  a.send(b.local_endpoint(), payload);
  std::optional<Datagram> d;
  for (int i = 0; i < 200 && !d; ++i) {
    d = b.poll_receive();
    if (!d) std::this_thread::sleep_for(milliseconds(5));
  }
  ASSERT_TRUE(d);
  EXPECT_EQ(d->payload, payload);
  EXPECT_EQ(d->source.port, a.local_endpoint().port);
}

TEST(Udp, LocalFailures) {
  UdpTransport a({"127.0.0.1", 0});
  EXPECT_THROW(a.send({"127.0.0.1", 9}, std::string(60001, 'x')), TransportError);
  a.close();
  EXPECT_THROW(a.send({"127.0.0.1", 9}, "x"), TransportError);
}
