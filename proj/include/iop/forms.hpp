#pragma once

// Enabled forms and attempts: the information-based interface between the
// protocol adapter and decision makers.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "iop/local_state.hpp"
#include "iop/message.hpp"
#include "iop/protocol.hpp"

namespace iop {

class Attempt;

/// A partial message instance that would be legal to send once every
/// parameter in `unbound` (the OUT parameters) receives a value.
struct Form {
  std::string message;
  std::string system;
  Bindings bound;                     // IN parameters, keys included
  std::vector<std::string> unbound;   // OUT parameters
  bool fresh = false;                 // starts a new enactment

  /// Value of a bound parameter; empty if unbound.
  std::string operator[](std::string_view parameter) const;
  Attempt bind(Bindings values) const;

  friend bool operator==(const Form&, const Form&) = default;
};

/// A completed form awaiting the adapter's check.
class Attempt {
 public:
  Attempt(Form form, Bindings values) : form_(std::move(form)), values_(std::move(values)) {}

  const Form& form() const { return form_; }
  /// Values supplied for the form's unbound parameters.
  const Bindings& values() const { return values_; }
  /// Bound and supplied parameters together.
  Bindings bindings() const;
  MessageInstance instance(const std::string& protocol) const;

 private:
  Form form_;
  Bindings values_;
};

struct EnabledForms {
  std::vector<Form> forms;

  std::vector<const Form*> messages(std::string_view message) const;
  std::size_t size() const { return forms.size(); }
  bool empty() const { return forms.empty(); }
  auto begin() const { return forms.begin(); }
  auto end() const { return forms.end(); }
};

/// Forms `role` may complete in `system`: one fresh form per message whose
/// keys are all OUT (and that has no IN parameter), plus one form per known
/// enactment whose IN parameters are bound and whose OUT and NIL parameters
/// are not, unless that message was already sent there. Throws ProtocolError
/// (UnknownRole) for a role the protocol does not declare.
EnabledForms enabled_forms(const LocalState& state, std::string_view role,
                           const ProtocolSpec& spec, std::string_view system);

struct Violation {
  std::size_t attempt;  // index into the checked batch
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Empty result means the batch may be committed. Any violation rejects the
/// whole batch.
std::vector<Violation> check(const std::vector<Attempt>& attempts, const LocalState& state,
                             const ProtocolSpec& spec);

}  // namespace iop
