#include "iop/transport.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <tuple>

#include "iop/message.hpp"

namespace iop {

Endpoint Endpoint::parse(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0)
    throw std::invalid_argument("endpoint must be host:port, got '" + std::string(text) + "'");
  const auto port_text = text.substr(colon + 1);
  unsigned port = 0;
  const auto [p, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc{} || p != port_text.data() + port_text.size() || port > 65535)
    throw std::invalid_argument("bad port in endpoint '" + std::string(text) + "'");
  return Endpoint{std::string(text.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

void SimConfig::validate() const {
  if (!(loss_prob >= 0.0 && loss_prob <= 1.0))
    throw std::invalid_argument("loss probability must be in [0, 1]");
  if (!(dup_prob >= 0.0 && dup_prob <= 1.0))
    throw std::invalid_argument("duplication probability must be in [0, 1]");
  if (max_delay.count() < 0) throw std::invalid_argument("max delay must be non-negative");
}

class SimNetwork::Node final : public Transport {
 public:
  Node(SimNetwork& net, Endpoint self) : net_(net), self_(std::move(self)) {}
  ~Node() override { net_.unbind(self_); }

  void send(const Endpoint& to, std::string_view payload) override {
    net_.submit(self_, to, payload);
  }
  std::optional<Datagram> poll_receive() override { return net_.take(self_); }
  Endpoint local_endpoint() const override { return self_; }

 private:
  SimNetwork& net_;
  Endpoint self_;
};

SimNetwork::SimNetwork(SimConfig config, TimePoint start)
    : config_(config), now_(start), rng_(config.seed) {
  config_.validate();
}

std::unique_ptr<Transport> SimNetwork::bind(const Endpoint& endpoint) {
  if (!inboxes_.try_emplace(endpoint).second)
    throw TransportError("endpoint " + endpoint.to_string() + " already bound");
  return std::make_unique<Node>(*this, endpoint);
}

void SimNetwork::unbind(const Endpoint& endpoint) { inboxes_.erase(endpoint); }

void SimNetwork::submit(const Endpoint& from, const Endpoint& to, std::string_view payload) {
  if (payload.size() > kMaxDatagramSize)
    throw TransportError("payload of " + std::to_string(payload.size()) + " bytes exceeds limit");
  if (inboxes_.count(to) == 0) throw TransportError("unroutable address " + to.to_string());

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::int64_t> delay(0, config_.max_delay.count());
  const auto seq = next_send_++;
  if (coin(rng_) < config_.loss_prob) {
    trace_.push_back({seq, from, to, now_, std::nullopt, 0});
    return;
  }
  const std::size_t copies = coin(rng_) < config_.dup_prob ? 2 : 1;
  for (std::size_t c = 0; c < copies; ++c) {
    const auto due = now_ + std::chrono::milliseconds(delay(rng_));
    pending_.push(Pending{due, next_order_++, to, Datagram{std::string(payload), from}});
    trace_.push_back({seq, from, to, now_, due, c});
  }
}

std::optional<Datagram> SimNetwork::take(const Endpoint& at) {
  const auto it = inboxes_.find(at);
  if (it == inboxes_.end()) throw TransportError("endpoint " + at.to_string() + " is not bound");
  if (it->second.empty()) return std::nullopt;
  auto d = std::move(it->second.front());
  it->second.pop_front();
  return d;
}

void SimNetwork::advance_to(TimePoint t) {
  if (t > now_) now_ = t;
  while (!pending_.empty() && pending_.top().due <= now_) {
    auto p = pending_.top();
    pending_.pop();
    // A datagram to an endpoint that went away is lost.
    if (auto it = inboxes_.find(p.to); it != inboxes_.end())
      it->second.push_back(std::move(p.datagram));
  }
}

std::optional<TimePoint> SimNetwork::next_delivery() const {
  if (pending_.empty()) return std::nullopt;
  return pending_.top().due;
}

namespace {

sockaddr_in resolve(const Endpoint& e) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(e.port);
  if (e.host.empty() || e.host == "0.0.0.0") {
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    return addr;
  }
  if (inet_pton(AF_INET, e.host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_DGRAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(e.host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr)
    throw TransportError("cannot resolve host " + e.host);
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  freeaddrinfo(res);
  return addr;
}

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

}  // namespace

UdpTransport::UdpTransport(const Endpoint& bind_to) {
  const auto addr = resolve(bind_to);
  fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) throw TransportError(errno_text("socket"));
  if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
    const auto msg = errno_text(("bind " + bind_to.to_string()).c_str());
    ::close(fd_);
    throw TransportError(msg);
  }
  ::fcntl(fd_, F_SETFL, ::fcntl(fd_, F_GETFL, 0) | O_NONBLOCK);
  sockaddr_in actual{};
  socklen_t len = sizeof actual;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&actual), &len);
  local_ = Endpoint{bind_to.host.empty() ? "0.0.0.0" : bind_to.host, ntohs(actual.sin_port)};
}

UdpTransport::~UdpTransport() { close(); }

void UdpTransport::close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void UdpTransport::send(const Endpoint& to, std::string_view payload) {
  if (fd_ < 0) throw TransportError("socket closed");
  if (payload.size() > kMaxDatagramSize)
    throw TransportError("payload of " + std::to_string(payload.size()) + " bytes exceeds limit");
  const auto addr = resolve(to);
  if (::sendto(fd_, payload.data(), payload.size(), 0, reinterpret_cast<const sockaddr*>(&addr),
               sizeof addr) < 0 &&
      errno != EAGAIN && errno != EWOULDBLOCK && errno != ECONNREFUSED)
    throw TransportError(errno_text("sendto"));
}

std::optional<Datagram> UdpTransport::poll_receive() {
  if (fd_ < 0) throw TransportError("socket closed");
  std::array<char, 65536> buf;
  for (;;) {
    sockaddr_in from{};
    socklen_t len = sizeof from;
    const auto n = ::recvfrom(fd_, buf.data(), buf.size(), 0, reinterpret_cast<sockaddr*>(&from), &len);
    if (n >= 0) {
      std::array<char, INET_ADDRSTRLEN> host{};
      ::inet_ntop(AF_INET, &from.sin_addr, host.data(), host.size());
      return Datagram{std::string(buf.data(), static_cast<std::size_t>(n)),
                      Endpoint{host.data(), ntohs(from.sin_port)}};
    }
    // ICMP port-unreachable from an earlier send surfaces here; ignore it.
    if (errno == ECONNREFUSED || errno == EINTR) continue;
    if (errno == EAGAIN || errno == EWOULDBLOCK) return std::nullopt;
    throw TransportError(errno_text("recvfrom"));
  }
}

}  // namespace iop
