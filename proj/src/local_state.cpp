#include "iop/local_state.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <tuple>

namespace iop {

LocalState::LocalState(std::vector<std::string> key_names) : key_names_(std::move(key_names)) {}

EnactmentKey LocalState::key_of(const MessageInstance& m) const {
  EnactmentKey key{m.system, {}};
  for (const auto& k : key_names_) {
    const auto it = m.bindings.find(k);
    if (it == m.bindings.end() || it->second.empty())
      throw std::invalid_argument("message " + m.message + " has no binding for key " + k);
    key.keys.push_back(it->second);
  }
  return key;
}

LocalState::Admission LocalState::classify(const MessageInstance& m) const {
  const auto id = id_of(m);
  if (const auto* existing = find(id))
    return existing->instance.bindings == m.bindings ? Admission::Duplicate : Admission::Conflict;
  if (const auto* known = knowledge(id.enactment))
    for (const auto& [param, value] : m.bindings) {
      const auto it = known->find(param);
      if (it != known->end() && it->second != value) return Admission::Conflict;
    }
  return Admission::Added;
}

LocalState::Admission LocalState::add(MessageInstance m, Direction direction) {
  const auto verdict = classify(m);
  if (verdict != Admission::Added) return verdict;
  auto id = id_of(m);
  auto& enactment = enactments_[id.enactment];
  for (const auto& [param, value] : m.bindings) enactment.knowledge.emplace(param, value);
  enactment.members.push_back(instances_.size());
  by_id_.emplace(std::move(id), instances_.size());
  instances_.push_back({std::move(m), direction, next_seq_++});
  return Admission::Added;
}

const StoredInstance* LocalState::find(const InstanceId& id) const {
  const auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &instances_[it->second];
}

const Bindings* LocalState::knowledge(const EnactmentKey& key) const {
  const auto it = enactments_.find(key);
  return it == enactments_.end() ? nullptr : &it->second.knowledge;
}

std::vector<EnactmentKey> LocalState::enactments(std::string_view system) const {
  std::vector<EnactmentKey> out;
  for (const auto& [key, _] : enactments_)
    if (key.system == system) out.push_back(key);
  return out;
}

std::vector<const StoredInstance*> LocalState::in_enactment(const EnactmentKey& key) const {
  std::vector<const StoredInstance*> out;
  const auto it = enactments_.find(key);
  if (it != enactments_.end())
    for (auto i : it->second.members) out.push_back(&instances_[i]);
  return out;
}

std::vector<const StoredInstance*> LocalState::messages(std::string_view message,
                                                        std::string_view system,
                                                        const Bindings& where) const {
  std::vector<const StoredInstance*> out;
  for (const auto& s : instances_) {
    if (s.instance.message != message) continue;
    if (!system.empty() && s.instance.system != system) continue;
    const bool match = std::all_of(where.begin(), where.end(), [&](const auto& kv) {
      const auto it = s.instance.bindings.find(kv.first);
      return it != s.instance.bindings.end() && it->second == kv.second;
    });
    if (match) out.push_back(&s);
  }
  return out;
}

bool LocalState::has(std::string_view message, const EnactmentKey& key,
                     Direction direction) const {
  const auto* s = find(InstanceId{std::string(message), key});
  return s != nullptr && s->direction == direction;
}

bool operator==(const LocalState& a, const LocalState& b) {
  auto contents = [](const LocalState& s) {
    std::set<std::tuple<std::string, std::string, Bindings, Direction>> out;
    for (const auto& i : s.instances_)
      out.emplace(i.instance.message, i.instance.system, i.instance.bindings, i.direction);
    return out;
  };
  return a.key_names_ == b.key_names_ && contents(a) == contents(b);
}

}  // namespace iop
