#include "iop/forms.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace iop {

std::string Form::operator[](std::string_view parameter) const {
  const auto it = bound.find(std::string(parameter));
  return it == bound.end() ? std::string{} : it->second;
}

Attempt Form::bind(Bindings values) const { return Attempt(*this, std::move(values)); }

Bindings Attempt::bindings() const {
  Bindings all = form_.bound;
  for (const auto& [k, v] : values_) all[k] = v;
  return all;
}

MessageInstance Attempt::instance(const std::string& protocol) const {
  return MessageInstance{protocol, form_.message, form_.system, bindings()};
}

std::vector<const Form*> EnabledForms::messages(std::string_view message) const {
  std::vector<const Form*> out;
  for (const auto& f : forms)
    if (f.message == message) out.push_back(&f);
  return out;
}

EnabledForms enabled_forms(const LocalState& state, std::string_view role,
                           const ProtocolSpec& spec, std::string_view system) {
  if (!spec.has_role(role))
    throw ProtocolError(ProtocolError::Kind::UnknownRole, "unknown role " + std::string(role));
  EnabledForms out;
  const auto enactments = state.enactments(system);
  for (const auto& m : spec.messages) {
    if (m.sender != role) continue;
    const auto ins = m.with(Adornment::In);
    const auto outs = m.with(Adornment::Out);
    const auto nils = m.with(Adornment::Nil);

    const bool all_keys_out = std::all_of(m.parameters.begin(), m.parameters.end(), [&](const auto& p) {
      return !spec.is_key(p.name) || p.adornment == Adornment::Out;
    });
    if (all_keys_out && ins.empty())
      out.forms.push_back(Form{m.name, std::string(system), {}, outs, true});

    for (const auto& key : enactments) {
      const Bindings& known = *state.knowledge(key);
      const auto bound = [&](const std::string& p) { return known.count(p) > 0; };
      if (!std::all_of(ins.begin(), ins.end(), bound)) continue;
      if (std::any_of(outs.begin(), outs.end(), bound)) continue;
      if (std::any_of(nils.begin(), nils.end(), bound)) continue;
      if (state.find(InstanceId{m.name, key}) != nullptr) continue;
      Form f{m.name, std::string(system), {}, outs, false};
      for (const auto& p : ins) f.bound.emplace(p, known.at(p));
      out.forms.push_back(std::move(f));
    }
  }
  return out;
}

std::vector<Violation> check(const std::vector<Attempt>& attempts, const LocalState& state,
                             const ProtocolSpec& spec) {
  std::vector<Violation> out;
  struct Slot {
    std::size_t attempt;
    std::string value;
    bool is_out;
  };
  std::map<std::pair<EnactmentKey, std::string>, Slot> batch;
  std::set<InstanceId> identities;

  for (std::size_t i = 0; i < attempts.size(); ++i) {
    const auto& a = attempts[i];
    auto violate = [&](std::string msg) { out.push_back({i, std::move(msg)}); };
    const auto* schema = spec.message(a.form().message);
    if (schema == nullptr) {
      violate("unknown message " + a.form().message);
      continue;
    }
    const auto all = a.bindings();
    bool complete = true;
    for (const auto& p : a.form().unbound) {
      const auto it = a.values().find(p);
      if (it == a.values().end()) {
        violate("unbound out parameter: " + p);
        complete = false;
      } else if (it->second.empty()) {
        violate("empty value for out parameter: " + p);
        complete = false;
      }
    }
    for (const auto& [p, v] : all) {
      const auto* decl = schema->find(p);
      if (decl == nullptr) {
        violate("unexpected parameter: " + p);
        complete = false;
      } else if (decl->adornment == Adornment::Nil) {
        violate("nil parameter bound: " + p);
        complete = false;
      } else if (v.empty()) {
        violate("empty value for parameter: " + p);
        complete = false;
      }
    }
    for (const auto& p : schema->parameters)
      if (p.adornment != Adornment::Nil && all.count(p.name) == 0 &&
          std::find(a.form().unbound.begin(), a.form().unbound.end(), p.name) ==
              a.form().unbound.end()) {
        violate("missing parameter: " + p.name);
        complete = false;
      }
    if (!complete) continue;

    const auto instance = a.instance(spec.name);
    const InstanceId id = state.id_of(instance);
    const Bindings* known = state.knowledge(id.enactment);

    if (state.find(id) != nullptr) {
      violate("stale form");
    } else if (!a.form().fresh) {
      const bool in_match = known != nullptr &&
                            std::all_of(a.form().bound.begin(), a.form().bound.end(), [&](const auto& kv) {
                              const auto it = known->find(kv.first);
                              return it != known->end() && it->second == kv.second;
                            });
      const bool outs_free = known == nullptr ||
                             std::none_of(a.form().unbound.begin(), a.form().unbound.end(),
                                          [&](const auto& p) { return known->count(p) > 0; });
      if (!in_match || !outs_free) violate("stale form");
    } else if (known != nullptr) {
      for (const auto& p : a.form().unbound)
        if (known->count(p) > 0) violate("out parameter already bound: " + p);
    }

    if (encode(instance).size() > kMaxDatagramSize) violate("oversize message");

    if (!identities.insert(id).second) violate("duplicate attempt for " + id.message);
    for (const auto& [p, v] : all) {
      const bool is_out = std::find(a.form().unbound.begin(), a.form().unbound.end(), p) !=
                          a.form().unbound.end();
      const auto [it, inserted] = batch.try_emplace({id.enactment, p}, Slot{i, v, is_out});
      if (inserted) continue;
      if (is_out && it->second.is_out)
        violate("conflicting out binding: " + p);
      else if (it->second.value != v)
        violate("conflicting binding: " + p);
    }
  }
  return out;
}

}  // namespace iop
