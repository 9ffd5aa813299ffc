#include "iop/enactment.hpp"

#include <algorithm>
#include <bit>
#include <unordered_set>

namespace iop {

std::string to_string(const Event& e) {
  return e.role + (e.kind == EventKind::Emit ? "!" : "?") + e.message;
}

Event parse_event(std::string_view text) {
  const auto pos = text.find_first_of("!?");
  if (pos == std::string_view::npos || pos == 0 || pos + 1 >= text.size())
    throw EnactmentError(EnactmentError::Kind::InvalidPath,
                         "malformed event '" + std::string(text) + "'");
  return Event{std::string(text.substr(0, pos)),
               text[pos] == '!' ? EventKind::Emit : EventKind::Receive,
               std::string(text.substr(pos + 1))};
}

bool Path::contains(const Event& e) const {
  return std::find(events.begin(), events.end(), e) != events.end();
}

std::string to_string(const Path& p) {
  std::string out = "(";
  for (std::size_t i = 0; i < p.events.size(); ++i) {
    if (i) out += ", ";
    out += to_string(p.events[i]);
  }
  return out + ")";
}

EventModel::EventModel(const ProtocolSpec& spec) : spec_(&spec) {
  if (spec.messages.size() > kMaxMessages)
    throw EnactmentError(EnactmentError::Kind::TooLarge,
                         "protocol has more than 32 messages");
  if (spec.parameters.size() > kMaxParameters)
    throw EnactmentError(EnactmentError::Kind::TooLarge,
                         "protocol has more than 64 parameters");
  for (const auto& p : spec.parameters) params_.push_back(p.name);
  for (std::size_t i = 0; i < params_.size(); ++i) public_ |= ParamSet{1} << i;

  auto role_index = [&](const std::string& r) {
    const auto it = std::find(spec.roles.begin(), spec.roles.end(), r);
    if (it == spec.roles.end())
      throw EnactmentError(EnactmentError::Kind::InvalidPath, "unknown role " + r);
    return static_cast<std::size_t>(it - spec.roles.begin());
  };
  for (const auto& m : spec.messages) {
    Compiled c;
    c.sender = role_index(m.sender);
    c.receiver = role_index(m.receiver);
    for (const auto& p : m.parameters) {
      const ParamSet b = ParamSet{1} << parameter_index(p.name);
      switch (p.adornment) {
        case Adornment::In:
          c.in |= b;
          break;
        case Adornment::Out:
          c.out |= b;
          break;
        case Adornment::Nil:
          c.nil |= b;
          break;
      }
    }
    messages_.push_back(c);
  }
}

std::size_t EventModel::parameter_index(std::string_view name) const {
  const auto it = std::find(params_.begin(), params_.end(), name);
  if (it == params_.end())
    throw EnactmentError(EnactmentError::Kind::InvalidPath,
                         "undeclared parameter " + std::string(name));
  return static_cast<std::size_t>(it - params_.begin());
}

const std::string& EventModel::parameter_name(std::size_t i) const { return params_.at(i); }

std::size_t EventModel::role_of(std::size_t event) const {
  const auto m = message_of(event);
  return is_emit(event) ? messages_[m].sender : messages_[m].receiver;
}

Event EventModel::event(std::size_t index) const {
  const auto m = message_of(index);
  return Event{spec_->roles[role_of(index)],
               is_emit(index) ? EventKind::Emit : EventKind::Receive,
               spec_->messages[m].name};
}

std::size_t EventModel::index_of(const Event& e) const {
  for (std::size_t m = 0; m < spec_->messages.size(); ++m) {
    if (spec_->messages[m].name != e.message) continue;
    const std::size_t idx = e.kind == EventKind::Emit ? emit_of(m) : receive_of(m);
    if (spec_->roles[role_of(idx)] != e.role)
      throw EnactmentError(EnactmentError::Kind::InvalidPath,
                           "event " + to_string(e) + " has the wrong role");
    return idx;
  }
  throw EnactmentError(EnactmentError::Kind::InvalidPath,
                       "event " + to_string(e) + " names an unknown message");
}

EventModel::ParamSet EventModel::observed(EventSet state, std::size_t role) const {
  ParamSet out = 0;
  for (std::size_t m = 0; m < messages_.size(); ++m) {
    const auto& c = messages_[m];
    if ((c.sender == role && (state & bit(emit_of(m)))) ||
        (c.receiver == role && (state & bit(receive_of(m)))))
      out |= c.in | c.out;
  }
  return out;
}

EventModel::ParamSet EventModel::observed_by_anyone(EventSet state) const {
  ParamSet out = 0;
  for (std::size_t m = 0; m < messages_.size(); ++m)
    if (state & (bit(emit_of(m)) | bit(receive_of(m)))) out |= carried(m);
  return out;
}

bool EventModel::enabled(EventSet state, std::size_t event) const {
  if (state & bit(event)) return false;
  const auto m = message_of(event);
  if (!is_emit(event)) return (state & bit(emit_of(m))) != 0;
  const auto& c = messages_[m];
  const ParamSet obs = observed(state, c.sender);
  return (c.in & ~obs) == 0 && ((c.out | c.nil) & obs) == 0;
}

EventModel::EventSet EventModel::enabled(EventSet state) const {
  EventSet out = 0;
  for (std::size_t e = 0; e < event_count(); ++e)
    if (enabled(state, e)) out |= bit(e);
  return out;
}

bool EventModel::complete(EventSet state) const {
  return (public_ & ~observed_by_anyone(state)) == 0;
}

EventModel::EventSet EventModel::state_of(const Path& path) const {
  EventSet state = 0;
  for (std::size_t i = 0; i < path.events.size(); ++i) {
    const auto idx = index_of(path.events[i]);
    if (state & bit(idx))
      throw EnactmentError(EnactmentError::Kind::InvalidPath,
                           "event " + to_string(path.events[i]) + " occurs twice");
    if (!enabled(state, idx))
      throw EnactmentError(EnactmentError::Kind::InvalidPath,
                           "event " + to_string(path.events[i]) + " at position " +
                               std::to_string(i) + " is not enabled");
    state |= bit(idx);
  }
  return state;
}

Path EventModel::path_of(const std::vector<std::size_t>& events) const {
  Path p;
  p.events.reserve(events.size());
  for (auto e : events) p.events.push_back(event(e));
  return p;
}

std::vector<std::size_t> EventModel::ordered(EventSet events) const {
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < messages_.size(); ++m)
    if (events & bit(emit_of(m))) out.push_back(emit_of(m));
  for (std::size_t m = 0; m < messages_.size(); ++m)
    if (events & bit(receive_of(m))) out.push_back(receive_of(m));
  return out;
}

ViewState view_state(const ProtocolSpec& spec, const Path& path) {
  const EventModel model(spec);
  const auto state = model.state_of(path);
  ViewState v;
  for (std::size_t r = 0; r < spec.roles.size(); ++r) {
    auto& obs = v.observed[spec.roles[r]];
    const auto mask = model.observed(state, r);
    for (std::size_t i = 0; i < spec.parameters.size(); ++i)
      if (mask & (EventModel::ParamSet{1} << i)) obs.insert(model.parameter_name(i));
  }
  for (std::size_t m = 0; m < spec.messages.size(); ++m) {
    if (state & EventModel::bit(EventModel::emit_of(m))) v.emitted.insert(spec.messages[m].name);
    if (state & EventModel::bit(EventModel::receive_of(m)))
      v.received.emplace(spec.messages[m].receiver, spec.messages[m].name);
  }
  return v;
}

std::vector<Event> enabled_events(const ProtocolSpec& spec, const Path& path) {
  const EventModel model(spec);
  std::vector<Event> out;
  for (auto e : model.ordered(model.enabled(model.state_of(path)))) out.push_back(model.event(e));
  return out;
}

Path extend(const ProtocolSpec& spec, const Path& path, const Event& event) {
  const EventModel model(spec);
  const auto state = model.state_of(path);
  std::size_t idx = 0;
  try {
    idx = model.index_of(event);
  } catch (const EnactmentError& err) {
    throw EnactmentError(EnactmentError::Kind::NotEnabled, err.what());
  }
  if (!model.enabled(state, idx))
    throw EnactmentError(EnactmentError::Kind::NotEnabled,
                         to_string(event) + " is not enabled after " + to_string(path));
  Path out = path;
  out.events.push_back(event);
  return out;
}

bool is_complete(const ProtocolSpec& spec, const Path& path) {
  const EventModel model(spec);
  return model.complete(model.state_of(path));
}

bool is_maximal(const ProtocolSpec& spec, const Path& path) {
  const EventModel model(spec);
  return model.enabled(model.state_of(path)) == 0;
}

namespace {

struct Enumerator {
  const EventModel& model;
  PathStats stats;
  std::vector<std::size_t> stack;
  std::unordered_set<EventModel::EventSet> seen;

  void run(EventModel::EventSet state) {
    seen.insert(state);
    const auto enabled = model.enabled(state);
    if (enabled == 0) {
      stats.maximal_paths.push_back(model.path_of(stack));
      return;
    }
    for (auto e : model.ordered(enabled)) {
      stack.push_back(e);
      ++stats.paths;
      stats.longest = std::max(stats.longest, stack.size());
      run(state | EventModel::bit(e));
      stack.pop_back();
    }
  }
};

}  // namespace

PathStats enumerate_all_paths(const ProtocolSpec& spec) {
  const EventModel model(spec);
  Enumerator en{model, {}, {}, {}};
  en.run(0);
  en.stats.states = en.seen.size();
  return std::move(en.stats);
}

}  // namespace iop
