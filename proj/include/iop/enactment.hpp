#pragma once

// Schema-level enactment semantics. One enactment instance is modelled: each
// message is emitted at most once and received at most once, and a role's
// knowledge is the set of parameters carried by the messages it has emitted or
// received (NIL parameters carry no binding).

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "iop/protocol.hpp"

namespace iop {

enum class EventKind { Emit, Receive };

struct Event {
  std::string role;
  EventKind kind = EventKind::Emit;
  std::string message;

  friend auto operator<=>(const Event&, const Event&) = default;
};

/// `B!Request` for emissions, `S?Request` for receptions.
std::string to_string(const Event& e);
Event parse_event(std::string_view text);

struct Path {
  std::vector<Event> events;

  std::size_t size() const { return events.size(); }
  bool empty() const { return events.empty(); }
  bool contains(const Event& e) const;

  friend bool operator==(const Path&, const Path&) = default;
};

/// `(B!Request, S?Request, ...)`
std::string to_string(const Path& p);

class EnactmentError : public std::runtime_error {
 public:
  enum class Kind { InvalidPath, NotEnabled, TooLarge };
  EnactmentError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Bitset-backed view of a protocol used by the enumerator and the verifier.
/// Event index 2*m is the emission of message m, 2*m+1 its reception.
/// The spec must outlive the model.
class EventModel {
 public:
  using EventSet = std::uint64_t;
  using ParamSet = std::uint64_t;

  static constexpr std::size_t kMaxMessages = 32;
  static constexpr std::size_t kMaxParameters = 64;

  explicit EventModel(const ProtocolSpec& spec);

  const ProtocolSpec& spec() const { return *spec_; }
  std::size_t message_count() const { return messages_.size(); }
  std::size_t event_count() const { return 2 * messages_.size(); }

  static std::size_t emit_of(std::size_t message) { return 2 * message; }
  static std::size_t receive_of(std::size_t message) { return 2 * message + 1; }
  static std::size_t message_of(std::size_t event) { return event / 2; }
  static bool is_emit(std::size_t event) { return event % 2 == 0; }
  static EventSet bit(std::size_t event) { return EventSet{1} << event; }

  std::size_t role_of(std::size_t event) const;
  std::size_t sender(std::size_t message) const { return messages_[message].sender; }
  std::size_t receiver(std::size_t message) const { return messages_[message].receiver; }

  ParamSet in_params(std::size_t m) const { return messages_[m].in; }
  ParamSet out_params(std::size_t m) const { return messages_[m].out; }
  ParamSet nil_params(std::size_t m) const { return messages_[m].nil; }
  /// Parameters whose binding travels with the message (IN and OUT).
  ParamSet carried(std::size_t m) const { return messages_[m].in | messages_[m].out; }
  ParamSet public_params() const { return public_; }
  std::size_t parameter_index(std::string_view name) const;
  const std::string& parameter_name(std::size_t i) const;

  Event event(std::size_t index) const;
  std::size_t index_of(const Event& e) const;

  ParamSet observed(EventSet state, std::size_t role) const;
  ParamSet observed_by_anyone(EventSet state) const;
  bool enabled(EventSet state, std::size_t event) const;
  EventSet enabled(EventSet state) const;
  bool complete(EventSet state) const;

  /// Validates the path and returns its event set.
  EventSet state_of(const Path& path) const;
  Path path_of(const std::vector<std::size_t>& events) const;

  /// Enabled events in exploration order: emissions before receptions, each
  /// in message declaration order.
  std::vector<std::size_t> ordered(EventSet events) const;

 private:
  struct Compiled {
    std::size_t sender = 0;
    std::size_t receiver = 0;
    ParamSet in = 0, out = 0, nil = 0;
  };

  const ProtocolSpec* spec_;
  std::vector<std::string> params_;
  std::vector<Compiled> messages_;
  ParamSet public_ = 0;
};

struct ViewState {
  std::map<std::string, std::set<std::string>> observed;
  std::set<std::string> emitted;
  std::set<std::pair<std::string, std::string>> received;  // (role, message)

  friend bool operator==(const ViewState&, const ViewState&) = default;
};

ViewState view_state(const ProtocolSpec& spec, const Path& path);

std::vector<Event> enabled_events(const ProtocolSpec& spec, const Path& path);
Path extend(const ProtocolSpec& spec, const Path& path, const Event& event);
bool is_complete(const ProtocolSpec& spec, const Path& path);
bool is_maximal(const ProtocolSpec& spec, const Path& path);

struct PathStats {
  std::size_t paths = 0;    // distinct nonempty event sequences
  std::size_t longest = 0;
  std::vector<Path> maximal_paths;
  std::size_t states = 0;   // distinct reachable event sets, empty one included
};

/// Exhaustive depth-first enumeration without reduction.
PathStats enumerate_all_paths(const ProtocolSpec& spec);

}  // namespace iop
