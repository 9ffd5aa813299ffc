#include "iop/resilience.hpp"

#include <charconv>
#include <regex>

#include "iop/listmap.hpp"

namespace iop {

std::vector<Policy> parse_policies(std::string_view text) {
  std::vector<ListMapEntry> entries;
  try {
    entries = parse_list_of_maps(text);
  } catch (const ListMapError& e) {
    throw PolicyError(PolicyError::Kind::Syntax, e.entry(), e.what());
  }

  static const std::regex action_re(R"(remind\s+(\w+)\s+of\s+(\w+)\s+until\s+(\w+))");
  std::vector<Policy> out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    for (const auto& [k, _] : e.fields)
      if (k != "action" && k != "when" && k != "max tries")
        throw PolicyError(PolicyError::Kind::Syntax, i, "unknown key '" + k + "'");
    const auto* action = e.get("action");
    const auto* when = e.get("when");
    const auto* tries = e.get("max tries");
    if (action == nullptr || when == nullptr || tries == nullptr)
      throw PolicyError(PolicyError::Kind::Syntax, i, "needs action, when and max tries");

    std::smatch m;
    if (!std::regex_match(*action, m, action_re))
      throw PolicyError(PolicyError::Kind::Syntax, i,
                        "action must read 'remind <Role> of <Message> until <Message>'");
    Policy p;
    p.remind_role = m[1];
    p.subject = m[2];
    p.until = m[3];
    try {
      p.when = CronSchedule::parse(*when);
    } catch (const CronError& err) {
      throw PolicyError(PolicyError::Kind::Syntax, i, err.what());
    }
    const auto [ptr, ec] = std::from_chars(tries->data(), tries->data() + tries->size(), p.max_tries);
    if (ec != std::errc{} || ptr != tries->data() + tries->size() || p.max_tries <= 0)
      throw PolicyError(PolicyError::Kind::Syntax, i, "max tries must be a positive integer");
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Policy> parse_policies(std::string_view text, const ProtocolSpec& spec,
                                   std::string_view agent_role) {
  auto policies = parse_policies(text);
  for (std::size_t i = 0; i < policies.size(); ++i) {
    const auto& p = policies[i];
    const auto* subject = spec.message(p.subject);
    if (subject == nullptr)
      throw PolicyError(PolicyError::Kind::UnknownMessage, i, "unknown message " + p.subject);
    const auto* until = spec.message(p.until);
    if (until == nullptr)
      throw PolicyError(PolicyError::Kind::UnknownMessage, i, "unknown message " + p.until);
    if (!spec.has_role(p.remind_role))
      throw PolicyError(PolicyError::Kind::UnknownRole, i, "unknown role " + p.remind_role);
    if (p.remind_role != subject->receiver)
      throw PolicyError(PolicyError::Kind::Invalid, i,
                        p.remind_role + " does not receive " + p.subject);
    if (until->receiver != subject->sender)
      throw PolicyError(PolicyError::Kind::Invalid, i,
                        p.until + " is not received by the sender of " + p.subject);
    if (!agent_role.empty() && subject->sender != agent_role)
      throw PolicyError(PolicyError::Kind::Invalid, i,
                        p.subject + " is not sent by " + std::string(agent_role));
  }
  return policies;
}

int RetryLedger::tries(const InstanceId& id) const {
  const auto it = entries_.find(id);
  return it == entries_.end() ? 0 : it->second.tries;
}

void RetryLedger::record(const InstanceId& id, TimePoint now) {
  auto& e = entries_[id];
  ++e.tries;
  e.last_fired = now;
}

std::vector<MessageInstance> due_retransmissions(const LocalState& state,
                                                 const std::vector<Policy>& policies,
                                                 RetryLedger& ledger, TimePoint now) {
  std::vector<MessageInstance> out;
  for (const auto& p : policies) {
    if (!p.when.matches(now)) continue;
    for (const auto* s : state.messages(p.subject)) {
      if (s->direction != Direction::Sent) continue;
      const auto id = state.id_of(s->instance);
      if (state.has(p.until, id.enactment, Direction::Received)) continue;
      if (ledger.tries(id) >= p.max_tries) continue;
      ledger.record(id, now);
      out.push_back(s->instance);
    }
  }
  return out;
}

}  // namespace iop
