#include "iop/script.hpp"

#include <charconv>
#include <memory>

#include "iop/listmap.hpp"

namespace iop {

namespace {

ValueGenerator parse_value(std::string_view v, std::size_t entry) {
  if (v == "$counter") return {ValueGenerator::Kind::Counter, {}};
  if (v.starts_with("$copy(") && v.ends_with(")")) {
    auto p = trim(v.substr(6, v.size() - 7));
    if (p.empty()) throw ScriptError(entry, "empty $copy()");
    return {ValueGenerator::Kind::Copy, p};
  }
  if (v.starts_with("$")) throw ScriptError(entry, "unknown generator " + std::string(v));
  return {ValueGenerator::Kind::Constant, std::string(v)};
}

std::vector<std::pair<std::string, ValueGenerator>> parse_bind(std::string_view text,
                                                               std::size_t entry) {
  std::vector<std::pair<std::string, ValueGenerator>> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    // $copy(x) never contains a comma, so a plain split is enough.
    auto item = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                          : comma - start));
    start = comma == std::string_view::npos ? text.size() + 1 : comma + 1;
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ScriptError(entry, "bind item needs name=value: " + item);
    auto name = trim(std::string_view(item).substr(0, eq));
    auto value = trim(std::string_view(item).substr(eq + 1));
    if (name.empty()) throw ScriptError(entry, "empty parameter name in bind");
    for (const auto& [n, _] : out)
      if (n == name) throw ScriptError(entry, "parameter bound twice: " + name);
    out.emplace_back(name, parse_value(value, entry));
  }
  return out;
}

Trigger parse_trigger(std::string_view on, std::size_t entry) {
  if (on == "start") return Trigger::on_start();
  if (on.starts_with("receive ")) {
    auto m = trim(on.substr(8));
    if (m.empty()) throw ScriptError(entry, "receive needs a message name");
    return Trigger::on_receive(m);
  }
  if (on.starts_with("schedule ")) {
    try {
      return Trigger::cron(trim(on.substr(9)));
    } catch (const CronError& e) {
      throw ScriptError(entry, e.what());
    }
  }
  throw ScriptError(entry, "on must be start, receive <Message> or schedule <cron>");
}

}  // namespace

std::vector<ScriptRule> parse_script(std::string_view text) {
  std::vector<ListMapEntry> entries;
  try {
    entries = parse_list_of_maps(text);
  } catch (const ListMapError& e) {
    throw ScriptError(e.entry(), e.what());
  }
  std::vector<ScriptRule> rules;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    for (const auto& [k, _] : e.fields)
      if (k != "on" && k != "send" && k != "require-received" && k != "bind" && k != "count")
        throw ScriptError(i, "unknown key '" + k + "'");
    const auto* on = e.get("on");
    const auto* send = e.get("send");
    if (on == nullptr || send == nullptr || send->empty())
      throw ScriptError(i, "needs on and send");
    ScriptRule r;
    r.trigger = parse_trigger(*on, i);
    r.send = *send;
    if (const auto* rr = e.get("require-received")) r.require_received = *rr;
    if (const auto* b = e.get("bind")) r.bind = parse_bind(*b, i);
    if (const auto* c = e.get("count")) {
      const auto [ptr, ec] = std::from_chars(c->data(), c->data() + c->size(), r.count);
      if (ec != std::errc{} || ptr != c->data() + c->size() || r.count <= 0)
        throw ScriptError(i, "count must be a positive integer");
      if (r.trigger.kind != Trigger::Kind::Start) throw ScriptError(i, "count needs on: start");
    }
    rules.push_back(std::move(r));
  }
  return rules;
}

std::vector<DecisionMakerRegistration> make_decision_makers(const std::vector<ScriptRule>& rules,
                                                            const ProtocolSpec& spec,
                                                            std::string_view role) {
  auto counter = std::make_shared<long>(0);
  const auto keys = spec.keys();
  std::vector<DecisionMakerRegistration> out;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const auto& rule = rules[i];
    const auto* schema = spec.message(rule.send);
    if (schema == nullptr) throw ScriptError(i, "unknown message " + rule.send);
    if (schema->sender != role)
      throw ScriptError(i, rule.send + " is not sent by " + std::string(role));
    if (rule.require_received && spec.message(*rule.require_received) == nullptr)
      throw ScriptError(i, "unknown message " + *rule.require_received);
    if (rule.trigger.kind == Trigger::Kind::Receive) {
      const auto* m = spec.message(rule.trigger.message);
      if (m == nullptr || m->receiver != role)
        throw ScriptError(i, std::string(role) + " does not receive " + rule.trigger.message);
    }

    auto generators = rule.bind;
    for (const auto& [name, _] : generators) {
      const auto* p = schema->find(name);
      if (p == nullptr || p->adornment != Adornment::Out)
        throw ScriptError(i, name + " is not an out parameter of " + rule.send);
    }
    for (const auto& p : schema->with(Adornment::Out)) {
      bool named = false;
      for (const auto& [name, _] : generators) named = named || name == p;
      if (!named) generators.emplace_back(p, ValueGenerator{ValueGenerator::Kind::Counter, {}});
    }

    auto body = [rule, generators, counter, keys](const EnabledForms& forms,
                                                  const LocalState& state) {
      std::vector<Attempt> attempts;
      for (const auto* f : forms.messages(rule.send)) {
        const Bindings* known = nullptr;
        if (!f->fresh) {
          EnactmentKey key{f->system, {}};
          for (const auto& k : keys) key.keys.push_back((*f)[k]);
          if (rule.require_received &&
              !state.has(*rule.require_received, key, Direction::Received))
            continue;
          known = state.knowledge(key);
        } else if (rule.require_received) {
          continue;
        }
        const int copies = f->fresh ? rule.count : 1;
        for (int c = 0; c < copies; ++c) {
          Bindings values;
          for (const auto& [name, g] : generators) {
            switch (g.kind) {
              case ValueGenerator::Kind::Constant:
                values[name] = g.text;
                break;
              case ValueGenerator::Kind::Counter:
                values[name] = std::to_string(++*counter);
                break;
              case ValueGenerator::Kind::Copy: {
                const auto it = known ? known->find(g.text) : Bindings::const_iterator{};
                if (known == nullptr || it == known->end())
                  throw std::runtime_error("$copy(" + g.text + "): not known in enactment");
                values[name] = it->second;
                break;
              }
            }
          }
          attempts.push_back(f->bind(std::move(values)));
        }
      }
      return attempts;
    };
    out.push_back({"rule " + std::to_string(i) + " (" + rule.send + ")", rule.trigger, body});
  }
  return out;
}

}  // namespace iop
