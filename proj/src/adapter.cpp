#include "iop/adapter.hpp"

#include <cstdio>
#include <exception>
#include <thread>

#include <json.hpp>

namespace iop {

namespace {

std::string iso_time(TimePoint t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()), int(hms.hours().count()),
                int(hms.minutes().count()), int(hms.seconds().count()),
                int(hms.subseconds().count()));
  return buf;
}

std::optional<std::string> schema_mismatch(const MessageInstance& m, const MessageSchema& schema) {
  for (const auto& p : schema.parameters) {
    const auto it = m.bindings.find(p.name);
    if (p.adornment == Adornment::Nil) {
      if (it != m.bindings.end()) return "nil parameter present: " + p.name;
    } else if (it == m.bindings.end()) {
      return "missing parameter: " + p.name;
    } else if (p.is_key && it->second.empty()) {
      return "empty key: " + p.name;
    }
  }
  for (const auto& [name, _] : m.bindings)
    if (!schema.has(name)) return "unexpected parameter: " + name;
  return std::nullopt;
}

}  // namespace

std::string to_json(const LogRecord& r) {
  nlohmann::ordered_json j;
  j["time"] = iso_time(r.time);
  j["agent"] = r.agent;
  j["event"] = r.kind;
  j["message"] = r.message;
  if (!r.detail.empty()) j["detail"] = r.detail;
  if (r.instance) {
    j["system"] = r.instance->system;
    j["payload"] = r.instance->bindings;
  }
  return j.dump();
}

ReceiveOutcome receive(std::string_view datagram, LocalState& state, const ProtocolSpec& spec,
                       std::string_view role) {
  MessageInstance m;
  try {
    m = decode(datagram);
  } catch (const WireError&) {
    return Rejected{"malformed"};
  }
  if (m.protocol != spec.name) return Rejected{"unknown protocol"};
  const auto* schema = spec.message(m.message);
  if (schema == nullptr) return Rejected{"unknown message"};
  if (schema->receiver != role) return Rejected{"not addressed to this role"};
  if (auto why = schema_mismatch(m, *schema)) return Rejected{*why};

  switch (state.add(m, Direction::Received)) {
    case LocalState::Admission::Added:
      return Accepted{std::move(m)};
    case LocalState::Admission::Duplicate:
      return DuplicateIgnored{std::move(m)};
    case LocalState::Admission::Conflict:
      break;
  }
  return Rejected{"integrity violation"};
}

CommitResult commit_and_emit(const std::vector<Attempt>& attempts, LocalState& state,
                             const ProtocolSpec& spec, const AgentConfig& config,
                             Transport& transport) {
  CommitResult result;
  result.violations = check(attempts, state, spec);
  if (!result.violations.empty()) return result;

  for (const auto& a : attempts) {
    auto m = a.instance(spec.name);
    state.add(m, Direction::Sent);
    const auto* schema = spec.message(m.message);
    try {
      const auto to = config.agents.find(schema->receiver);
      if (to == config.agents.end())
        throw TransportError("no address for role " + schema->receiver);
      transport.send(to->second, encode(m));
    } catch (const TransportError& e) {
      result.send_errors.push_back(m.message + ": " + e.what());
    }
    result.emitted.push_back(std::move(m));
  }
  return result;
}

Adapter::Adapter(const ProtocolSpec& spec, AgentConfig config, Transport& transport)
    : spec_(spec), config_(std::move(config)), transport_(transport), state_(spec) {
  if (!spec_.has_role(config_.role))
    throw ProtocolError(ProtocolError::Kind::UnknownRole, "unknown role " + config_.role);
}

void Adapter::add(DecisionMakerRegistration registration) {
  if (registration.trigger.kind == Trigger::Kind::Receive) {
    const auto* m = spec_.message(registration.trigger.message);
    if (m == nullptr || m->receiver != config_.role)
      throw ProtocolError(ProtocolError::Kind::UnknownRole,
                          registration.name + ": " + config_.role + " does not receive " +
                              registration.trigger.message);
  }
  registrations_.push_back(std::move(registration));
}

void Adapter::log(TimePoint t, std::string kind, std::string message, std::string detail,
                  std::optional<MessageInstance> instance) {
  if (sink_)
    sink_(LogRecord{t, config_.role, std::move(kind), std::move(message), std::move(detail),
                    std::move(instance)});
}

CommitResult Adapter::invoke(const DecisionMakerRegistration& registration, TimePoint now) {
  const LocalState snapshot = state_;
  std::vector<Attempt> attempts;
  try {
    const auto forms = enabled_forms(snapshot, config_.role, spec_, config_.system);
    attempts = registration.body(forms, snapshot);
  } catch (const std::exception& e) {
    log(now, "decision-error", {}, registration.name + ": " + e.what());
    return {};
  }
  auto result = commit_and_emit(attempts, state_, spec_, config_, transport_);
  for (const auto& v : result.violations)
    log(now, "check-failed", attempts[v.attempt].form().message,
        registration.name + ": " + v.message);
  for (const auto& m : result.emitted) log(now, "emit", m.message, {}, m);
  for (const auto& e : result.send_errors) log(now, "send-error", {}, e);
  return result;
}

void Adapter::start(TimePoint now) {
  last_minute_ = std::chrono::floor<std::chrono::minutes>(now);
  for (const auto& r : registrations_)
    if (r.trigger.kind == Trigger::Kind::Start) invoke(r, now);
}

void Adapter::handle(const Datagram& d, TimePoint now) {
  const auto outcome = receive(d.payload, state_, spec_, config_.role);
  if (const auto* a = std::get_if<Accepted>(&outcome)) {
    log(now, "accept", a->instance.message, {}, a->instance);
    for (const auto& r : registrations_)
      if (r.trigger.kind == Trigger::Kind::Receive && r.trigger.message == a->instance.message)
        invoke(r, now);
  } else if (const auto* dup = std::get_if<DuplicateIgnored>(&outcome)) {
    log(now, "duplicate", dup->instance.message, {}, dup->instance);
    if (answer_reminders_) answer(dup->instance, now);
  } else {
    log(now, "reject", {}, std::get<Rejected>(outcome).reason + " from " + d.source.to_string());
  }
}

void Adapter::resend(const MessageInstance& m, TimePoint now, std::string_view why) {
  ++retransmissions_;
  log(now, "retransmit", m.message, std::string(why), m);
  const auto* schema = spec_.message(m.message);
  try {
    const auto to = config_.agents.find(schema->receiver);
    if (to == config_.agents.end()) throw TransportError("no address for role " + schema->receiver);
    transport_.send(to->second, encode(m));
  } catch (const TransportError& e) {
    log(now, "send-error", m.message, e.what());
  }
}

void Adapter::answer(const MessageInstance& duplicate, TimePoint now) {
  const auto id = state_.id_of(duplicate);
  const auto* original = state_.find(id);
  if (original == nullptr || original->direction != Direction::Received) return;
  const auto& peer = spec_.message(duplicate.message)->sender;
  for (const auto* s : state_.in_enactment(id.enactment)) {
    if (s->direction != Direction::Sent || s->seq < original->seq) continue;
    if (spec_.message(s->instance.message)->receiver != peer) continue;
    const auto sid = state_.id_of(s->instance);
    if (ledger_.tries(sid) >= answer_budget_) continue;
    ledger_.record(sid, now);
    resend(s->instance, now, "answer");
  }
}

void Adapter::run_minute(MinutePoint minute) {
  const TimePoint t = minute;
  for (const auto& r : registrations_)
    if (r.trigger.kind == Trigger::Kind::Cron && r.trigger.schedule.matches(minute)) invoke(r, t);
  for (const auto& m : due_retransmissions(state_, policies_, ledger_, t)) resend(m, t, "remind");
}

void Adapter::tick(TimePoint now) {
  while (auto d = transport_.poll_receive()) handle(*d, now);

  const auto minute = std::chrono::floor<std::chrono::minutes>(now);
  if (!last_minute_) {
    last_minute_ = minute;
    return;
  }
  while (*last_minute_ < minute) {
    *last_minute_ += std::chrono::minutes(1);
    run_minute(*last_minute_);
  }
}

void Adapter::run(std::stop_token stop, std::chrono::milliseconds poll) {
  const auto now = [] {
    return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
  };
  if (!last_minute_) start(now());
  while (!stop.stop_requested()) {
    tick(now());
    std::this_thread::sleep_for(poll);
  }
}

}  // namespace iop
