#pragma once

// Application-level retransmission: remind-until policies.
//
//   - action: remind Buyer of Shipment until Payment
//     when: 0 0 * * * // daily
//     max tries: 5
//
// While a sent Shipment has no received Payment in its enactment, it is resent
// verbatim whenever `when` fires, at most `max tries` times.

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "iop/cron.hpp"
#include "iop/local_state.hpp"
#include "iop/message.hpp"
#include "iop/protocol.hpp"

namespace iop {

struct Policy {
  std::string remind_role;
  std::string subject;  // message to retransmit
  std::string until;    // awaited response
  CronSchedule when;
  int max_tries = 1;
};

class PolicyError : public std::runtime_error {
 public:
  enum class Kind { Syntax, UnknownMessage, UnknownRole, Invalid };
  PolicyError(Kind kind, std::size_t entry, const std::string& what)
      : std::runtime_error("policy " + std::to_string(entry) + ": " + what),
        kind_(kind),
        entry_(entry) {}
  Kind kind() const noexcept { return kind_; }
  std::size_t entry() const noexcept { return entry_; }

 private:
  Kind kind_;
  std::size_t entry_;
};

/// Syntax only.
std::vector<Policy> parse_policies(std::string_view text);
/// Also checks names against `spec`: the remind role must be the subject's
/// receiver, and `until` must travel the other way. With a nonempty
/// `agent_role`, the subject must be sent by that role.
std::vector<Policy> parse_policies(std::string_view text, const ProtocolSpec& spec,
                                   std::string_view agent_role = {});

/// Retransmission count per sent instance. Reminders and answers to reminders
/// draw from the same budget.
class RetryLedger {
 public:
  struct Entry {
    int tries = 0;
    std::optional<TimePoint> last_fired;
  };

  int tries(const InstanceId& id) const;
  void record(const InstanceId& id, TimePoint now);
  const std::map<InstanceId, Entry>& entries() const { return entries_; }
  void clear() { entries_.clear(); }

 private:
  std::map<InstanceId, Entry> entries_;
};

/// Instances to resend at `now` (minute granularity). Increments the ledger
/// for every returned instance.
std::vector<MessageInstance> due_retransmissions(const LocalState& state,
                                                 const std::vector<Policy>& policies,
                                                 RetryLedger& ledger, TimePoint now);

}  // namespace iop
