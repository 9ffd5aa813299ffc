#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "iop/message.hpp"
#include "iop/protocol.hpp"

namespace iop {

enum class Direction { Sent, Received };

struct StoredInstance {
  MessageInstance instance;
  Direction direction;
  std::uint64_t seq;  // insertion order within this state
};

/// The messages an agent has sent and received. At most one instance per
/// identity (message, system, keys), and within an enactment every parameter
/// has at most one value.
class LocalState {
 public:
  enum class Admission { Added, Duplicate, Conflict };

  explicit LocalState(std::vector<std::string> key_names);
  explicit LocalState(const ProtocolSpec& spec) : LocalState(spec.keys()) {}

  const std::vector<std::string>& key_names() const { return key_names_; }

  /// Throws std::invalid_argument if a key parameter is unbound or empty.
  EnactmentKey key_of(const MessageInstance& m) const;
  InstanceId id_of(const MessageInstance& m) const { return {m.message, key_of(m)}; }

  /// Duplicate: same identity with equal bindings. Conflict: same identity
  /// with different bindings, or a parameter already bound to another value
  /// in the enactment.
  Admission classify(const MessageInstance& m) const;
  Admission add(MessageInstance m, Direction direction);

  const StoredInstance* find(const InstanceId& id) const;
  /// Union of all bindings in the enactment, or nullptr if none is stored.
  const Bindings* knowledge(const EnactmentKey& key) const;
  std::vector<EnactmentKey> enactments(std::string_view system) const;
  std::vector<const StoredInstance*> in_enactment(const EnactmentKey& key) const;

  /// Query by example: equality on message name, system (empty matches any)
  /// and the given parameter values.
  std::vector<const StoredInstance*> messages(std::string_view message,
                                              std::string_view system = {},
                                              const Bindings& where = {}) const;
  bool has(std::string_view message, const EnactmentKey& key, Direction direction) const;

  const std::vector<StoredInstance>& all() const { return instances_; }
  std::size_t size() const { return instances_.size(); }

  /// Same instances with the same directions, regardless of arrival order.
  friend bool operator==(const LocalState& a, const LocalState& b);

 private:
  struct Enactment {
    Bindings knowledge;
    std::vector<std::size_t> members;
  };

  std::vector<std::string> key_names_;
  std::vector<StoredInstance> instances_;
  std::map<InstanceId, std::size_t> by_id_;
  std::map<EnactmentKey, Enactment> enactments_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace iop
