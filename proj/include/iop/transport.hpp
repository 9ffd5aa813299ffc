#pragma once

// Best-effort datagram transport. Agents only see the Transport interface, so
// the same adapter runs over UDP or over the deterministic simulator.

#include <chrono>
#include <compare>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "iop/cron.hpp"

namespace iop {

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;

  /// "host:port"; throws std::invalid_argument.
  static Endpoint parse(std::string_view text);
  std::string to_string() const { return host + ":" + std::to_string(port); }

  friend auto operator<=>(const Endpoint&, const Endpoint&) = default;
};

struct Datagram {
  std::string payload;
  Endpoint source;
};

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Transport {
 public:
  virtual ~Transport() = default;
  /// Queues the payload for best-effort delivery. Throws TransportError only
  /// for local failures (unroutable address, oversized payload).
  virtual void send(const Endpoint& to, std::string_view payload) = 0;
  /// Non-blocking.
  virtual std::optional<Datagram> poll_receive() = 0;
  virtual Endpoint local_endpoint() const = 0;
};

struct SimConfig {
  double loss_prob = 0.0;
  double dup_prob = 0.0;
  std::chrono::milliseconds max_delay{0};
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument for probabilities outside [0, 1].
  void validate() const;
};

struct TraceEntry {
  std::uint64_t send_seq;
  Endpoint from;
  Endpoint to;
  TimePoint sent;
  std::optional<TimePoint> delivered;  // empty when dropped
  std::size_t copy;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

/// In-process network on a virtual clock. Each send is dropped with
/// loss_prob; a surviving datagram is duplicated with dup_prob; every copy
/// gets an independent delay in [0, max_delay]. The schedule is a pure
/// function of the config and the sequence of sends. Payloads are never
/// altered.
class SimNetwork {
 public:
  explicit SimNetwork(SimConfig config, TimePoint start = TimePoint{});
  SimNetwork(const SimNetwork&) = delete;
  SimNetwork& operator=(const SimNetwork&) = delete;

  /// The returned transport must not outlive the network.
  std::unique_ptr<Transport> bind(const Endpoint& endpoint);

  TimePoint now() const { return now_; }
  /// Moves every datagram due at or before `t` into its destination inbox.
  void advance_to(TimePoint t);
  std::optional<TimePoint> next_delivery() const;
  std::size_t in_flight() const { return pending_.size(); }
  const std::vector<TraceEntry>& trace() const { return trace_; }
  const SimConfig& config() const { return config_; }

 private:
  class Node;

  struct Pending {
    TimePoint due;
    std::uint64_t order;
    Endpoint to;
    Datagram datagram;
    bool operator>(const Pending& o) const {
      return std::tie(due, order) > std::tie(o.due, o.order);
    }
  };

  void submit(const Endpoint& from, const Endpoint& to, std::string_view payload);
  std::optional<Datagram> take(const Endpoint& at);
  void unbind(const Endpoint& endpoint);

  SimConfig config_;
  TimePoint now_;
  std::mt19937_64 rng_;
  std::uint64_t next_send_ = 0;
  std::uint64_t next_order_ = 0;
  std::map<Endpoint, std::deque<Datagram>> inboxes_;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> pending_;
  std::vector<TraceEntry> trace_;
};

/// IPv4 UDP socket in non-blocking mode. Port 0 binds an ephemeral port;
/// local_endpoint() reports the actual one.
class UdpTransport final : public Transport {
 public:
  explicit UdpTransport(const Endpoint& bind_to);
  ~UdpTransport() override;
  UdpTransport(const UdpTransport&) = delete;
  UdpTransport& operator=(const UdpTransport&) = delete;

  void send(const Endpoint& to, std::string_view payload) override;
  std::optional<Datagram> poll_receive() override;
  Endpoint local_endpoint() const override { return local_; }
  void close();

 private:
  int fd_ = -1;
  Endpoint local_;
};

}  // namespace iop
