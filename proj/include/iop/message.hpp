#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace iop {

/// Parameter values are opaque strings.
using Bindings = std::map<std::string, std::string>;

struct MessageInstance {
  std::string protocol;
  std::string message;
  std::string system;
  Bindings bindings;

  friend bool operator==(const MessageInstance&, const MessageInstance&) = default;
};

/// (system, key tuple): everything bound under the same key tuple in the same
/// system belongs to one enactment.
struct EnactmentKey {
  std::string system;
  std::vector<std::string> keys;

  friend auto operator<=>(const EnactmentKey&, const EnactmentKey&) = default;
};

struct InstanceId {
  std::string message;
  EnactmentKey enactment;

  friend auto operator<=>(const InstanceId&, const InstanceId&) = default;
};

inline constexpr std::size_t kMaxDatagramSize = 60000;

class WireError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `{"protocol":..,"message":..,"system":..,"payload":{param: value, ...}}`.
/// Deterministic: equal instances encode to identical bytes.
std::string encode(const MessageInstance& m);
/// Throws WireError on anything that is not a well-formed document.
MessageInstance decode(std::string_view datagram);

std::string to_string(const MessageInstance& m);

}  // namespace iop
