#pragma once

// Declarative demo decision makers, one per list entry:
//
//   - on: schedule 0 17 * * *
//     send: Payment
//     require-received: Shipment
//     bind: paid=10
//
// `on` is `start`, `receive <Message>` or `schedule <cron>`. Values in `bind`
// are constants, `$counter` (shared per script, starting at 1) or
// `$copy(param)` (the enactment's value of param). OUT parameters not named
// in `bind` get `$counter`. `count` (start only) sends that many fresh
// instances.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "iop/adapter.hpp"
#include "iop/protocol.hpp"

namespace iop {

struct ValueGenerator {
  enum class Kind { Constant, Counter, Copy };
  Kind kind = Kind::Constant;
  std::string text;  // constant value or copied parameter

  friend bool operator==(const ValueGenerator&, const ValueGenerator&) = default;
};

struct ScriptRule {
  Trigger trigger;
  std::string send;
  std::optional<std::string> require_received;
  std::vector<std::pair<std::string, ValueGenerator>> bind;
  int count = 1;
};

class ScriptError : public std::runtime_error {
 public:
  ScriptError(std::size_t entry, const std::string& what)
      : std::runtime_error("script entry " + std::to_string(entry) + ": " + what), entry_(entry) {}
  std::size_t entry() const noexcept { return entry_; }

 private:
  std::size_t entry_;
};

std::vector<ScriptRule> parse_script(std::string_view text);

/// One registration per rule. Throws ScriptError if a rule does not fit
/// `role` in `spec`.
std::vector<DecisionMakerRegistration> make_decision_makers(const std::vector<ScriptRule>& rules,
                                                            const ProtocolSpec& spec,
                                                            std::string_view role);

}  // namespace iop
