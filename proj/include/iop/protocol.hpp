#pragma once

// Information protocols: data model, parser, validator and canonical printer.
//
// Source format (whitespace-insensitive, UTF-8):
//
//   Flexible Purchase {
//     roles B, S
//     parameters out ID key, out item, out status, out paid
//     B -> S: Request[out ID, out item]
//     S -> B: Shipment[in ID, in item, out status]
//     B -> S: Payment[in ID, in item, out paid]
//   }
//
// `role`/`roles`, `parameter`/`parameters` and the arrows `->`/`↦` are
// interchangeable. A parameter is a key if it is marked `key` anywhere.

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace iop {

enum class Adornment { In, Out, Nil };

std::string_view to_string(Adornment a);

struct ParameterDecl {
  std::string name;
  Adornment adornment = Adornment::Out;
  bool is_key = false;

  friend bool operator==(const ParameterDecl&, const ParameterDecl&) = default;
};

struct MessageSchema {
  std::string name;
  std::string sender;
  std::string receiver;
  std::vector<ParameterDecl> parameters;

  const ParameterDecl* find(std::string_view parameter) const;
  bool has(std::string_view parameter) const { return find(parameter) != nullptr; }
  // Parameter names with the given adornment, in declaration order.
  std::vector<std::string> with(Adornment a) const;

  friend bool operator==(const MessageSchema&, const MessageSchema&) = default;
};

struct ProtocolSpec {
  std::string name;
  std::vector<std::string> roles;
  std::vector<ParameterDecl> parameters;
  std::vector<MessageSchema> messages;

  bool has_role(std::string_view role) const;
  const MessageSchema* message(std::string_view name) const;
  const ParameterDecl* parameter(std::string_view name) const;
  // Key parameter names in protocol declaration order; their value tuple is
  // the identity of an enactment.
  std::vector<std::string> keys() const;
  bool is_key(std::string_view parameter) const;

  friend bool operator==(const ProtocolSpec&, const ProtocolSpec&) = default;
};

class ProtocolError : public std::runtime_error {
 public:
  enum class Kind { Syntax, DuplicateName, UnknownRole, Unsupported, Io };

  ProtocolError(Kind kind, std::string message, std::size_t line = 0,
                std::size_t column = 0);

  Kind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  Kind kind_;
  std::size_t line_;
  std::size_t column_;
};

ProtocolSpec parse_protocol(std::string_view source);
ProtocolSpec load_protocol(const std::filesystem::path& file);

enum class Severity { Error, Warning, Info };

std::string_view to_string(Severity s);

struct Diagnostic {
  Severity severity;
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

/// Structural checks. Errors are invariant violations; warnings flag
/// parameters that no message can bind; infos flag parameters adorned OUT in
/// more than one message (a potential safety conflict).
std::vector<Diagnostic> validate_protocol(const ProtocolSpec& spec);

bool has_errors(const std::vector<Diagnostic>& diagnostics);

/// Canonical text: `roles`, `parameters`, `->`, and `key` only in the
/// protocol declaration. Reparses to a structurally equal spec.
std::string format_protocol(const ProtocolSpec& spec);

}  // namespace iop
