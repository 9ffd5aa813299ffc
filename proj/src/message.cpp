#include "iop/message.hpp"

#include <json.hpp>

namespace iop {

std::string encode(const MessageInstance& m) {
  nlohmann::ordered_json j;
  j["protocol"] = m.protocol;
  j["message"] = m.message;
  j["system"] = m.system;
  auto& payload = j["payload"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.bindings) payload[k] = v;
  return j.dump();
}

MessageInstance decode(std::string_view datagram) {
  const auto j = nlohmann::json::parse(datagram.begin(), datagram.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw WireError("not a JSON object");
  MessageInstance m;
  for (const auto* field : {"protocol", "message", "system"}) {
    const auto it = j.find(field);
    if (it == j.end() || !it->is_string())
      throw WireError(std::string("missing string field '") + field + "'");
  }
  m.protocol = j["protocol"].get<std::string>();
  m.message = j["message"].get<std::string>();
  m.system = j["system"].get<std::string>();
  const auto payload = j.find("payload");
  if (payload == j.end() || !payload->is_object()) throw WireError("missing payload object");
  for (const auto& [k, v] : payload->items()) {
    if (!v.is_string()) throw WireError("payload value for '" + k + "' is not a string");
    m.bindings.emplace(k, v.get<std::string>());
  }
  return m;
}

std::string to_string(const MessageInstance& m) {
  std::string out = m.message + "(";
  bool first = true;
  for (const auto& [k, v] : m.bindings) {
    out += (first ? "" : ", ") + k + "=" + v;
    first = false;
  }
  return out + ")@" + m.system;
}

}  // namespace iop
