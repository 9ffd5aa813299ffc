#include "iop/verifier.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <chrono>
#include <functional>
#include <unordered_set>

#include <json.hpp>

namespace iop {

ConflictRelation::ConflictRelation(const EventModel& model) {
  using ParamSet = EventModel::ParamSet;
  const auto n = model.message_count();

  ParamSet seen = 0, conflicted = 0;
  for (std::size_t m = 0; m < n; ++m) {
    conflicted |= seen & model.out_params(m);
    seen |= model.out_params(m);
  }
  for (std::size_t i = 0; i < model.spec().parameters.size(); ++i)
    if (conflicted & (ParamSet{1} << i)) names_.insert(model.parameter_name(i));

  // OUT or NIL parameters of the messages each role sends: observing one of
  // them disables that role's emission.
  std::vector<ParamSet> guarded(model.spec().roles.size(), 0);
  std::vector<ParamSet> nil_sent(model.spec().roles.size(), 0);
  for (std::size_t m = 0; m < n; ++m) {
    guarded[model.sender(m)] |= model.out_params(m) | model.nil_params(m);
    nil_sent[model.sender(m)] |= model.nil_params(m);
  }

  visible_.assign(model.event_count(), false);
  for (std::size_t m = 0; m < n; ++m) {
    const auto r = model.sender(m);
    const ParamSet own_nil = nil_sent[r] & ~model.nil_params(m);
    visible_[EventModel::emit_of(m)] = (model.out_params(m) & conflicted) != 0 ||
                                       model.nil_params(m) != 0 ||
                                       (model.out_params(m) & own_nil) != 0;
    visible_[EventModel::receive_of(m)] = (model.carried(m) & guarded[model.receiver(m)]) != 0;
  }
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void require_valid(const ProtocolSpec& spec) {
  for (const auto& d : validate_protocol(spec))
    if (d.severity == Severity::Error)
      throw VerificationError("refusing to verify invalid protocol: " + d.message);
}

class CanonicalSearch {
 public:
  using EventSet = EventModel::EventSet;
  // Returns true to stop the search.
  using Visitor = std::function<bool(EventSet, const std::vector<std::size_t>&)>;

  CanonicalSearch(const EventModel& model, Visitor on_state)
      : model_(model), conflicts_(model), on_state_(std::move(on_state)) {}

  void run() { visit(0); }

  std::size_t checked() const { return visited_.size(); }
  const std::vector<std::pair<EventSet, std::vector<std::size_t>>>& terminals() const {
    return terminals_;
  }

 private:
  void visit(EventSet state) {
    if (stopped_ || !visited_.insert(state).second) return;
    if (on_state_ && on_state_(state, stack_)) {
      stopped_ = true;
      return;
    }
    const EventSet enabled = model_.enabled(state);
    if (enabled == 0) {
      terminals_.emplace_back(state, stack_);
      return;
    }
    if (const auto pick = invisible_choice(enabled)) {
      step(state, *pick);
      return;
    }
    for (auto e : model_.ordered(enabled)) {
      step(state, e);
      if (stopped_) return;
    }
  }

  void step(EventSet state, std::size_t e) {
    stack_.push_back(e);
    visit(state | EventModel::bit(e));
    stack_.pop_back();
  }

  // Emissions first in declaration order; then receptions, most recently
  // emitted message first.
  std::optional<std::size_t> invisible_choice(EventSet enabled) const {
    for (auto e : model_.ordered(enabled))
      if (EventModel::is_emit(e) && !conflicts_.visible(e)) return e;
    for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) {
      if (!EventModel::is_emit(*it)) continue;
      const auto r = EventModel::receive_of(EventModel::message_of(*it));
      if ((enabled & EventModel::bit(r)) && !conflicts_.visible(r)) return r;
    }
    return std::nullopt;
  }

  const EventModel& model_;
  ConflictRelation conflicts_;
  Visitor on_state_;
  std::unordered_set<EventSet> visited_;
  std::vector<std::size_t> stack_;
  std::vector<std::pair<EventSet, std::vector<std::size_t>>> terminals_;
  bool stopped_ = false;
};

}  // namespace

ExplorationResult canonical_explore(const ProtocolSpec& spec) {
  const EventModel model(spec);
  CanonicalSearch search(model, nullptr);
  search.run();
  ExplorationResult out;
  out.states_checked = search.checked();
  for (const auto& [state, events] : search.terminals())
    out.canonical_maximal_paths.push_back(model.path_of(events));
  return out;
}

Verdict check_liveness(const ProtocolSpec& spec) {
  const auto start = Clock::now();
  require_valid(spec);
  const EventModel model(spec);
  CanonicalSearch search(model, nullptr);
  search.run();

  Verdict v;
  v.property = Property::Liveness;
  v.checked = search.checked();
  v.maximal_paths = search.terminals().size();
  const std::vector<std::size_t>* worst = nullptr;
  for (const auto& [state, events] : search.terminals())
    if (!model.complete(state) && (worst == nullptr || events.size() < worst->size()))
      worst = &events;
  if (worst != nullptr) {
    v.holds = false;
    v.reason = kLivenessReason;
    v.counterexample = model.path_of(*worst);
  }
  v.elapsed = seconds_since(start);
  return v;
}

Verdict check_safety(const ProtocolSpec& spec) {
  const auto start = Clock::now();
  require_valid(spec);
  const EventModel model(spec);

  Verdict v;
  v.property = Property::Safety;
  CanonicalSearch search(model, [&](EventModel::EventSet state,
                                    const std::vector<std::size_t>& events) {
    EventModel::ParamSet bound = 0;
    for (std::size_t m = 0; m < model.message_count(); ++m) {
      if (!(state & EventModel::bit(EventModel::emit_of(m)))) continue;
      if (const auto twice = bound & model.out_params(m)) {
        v.holds = false;
        v.reason = kSafetyReason;
        v.counterexample = model.path_of(events);
        v.offending_parameter = model.parameter_name(std::countr_zero(twice));
        return true;
      }
      bound |= model.out_params(m);
    }
    return false;
  });
  search.run();
  v.checked = search.checked();
  v.maximal_paths = search.terminals().size();
  v.elapsed = seconds_since(start);
  return v;
}

bool trivially_safe(const ProtocolSpec& spec) {
  const EventModel model(spec);
  return ConflictRelation(model).conflicted().empty();
}

PathStats all_paths_report(const ProtocolSpec& spec, double* elapsed) {
  const auto start = Clock::now();
  auto stats = enumerate_all_paths(spec);
  if (elapsed != nullptr) *elapsed = seconds_since(start);
  return stats;
}

namespace {

std::string format_seconds(double s) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), s);
  return std::string(buf.data(), res.ptr);
}

std::vector<std::string> event_strings(const Path& p) {
  std::vector<std::string> out;
  for (const auto& e : p.events) out.push_back(to_string(e));
  return out;
}

}  // namespace

std::string render_verdict(const Verdict& v) {
  std::string out = "{";
  out += v.property == Property::Liveness ? "'live': " : "'safe': ";
  out += v.holds ? "True" : "False";
  if (v.reason) out += ", 'reason': '" + *v.reason + "'";
  if (v.counterexample) out += ", 'path': " + to_string(*v.counterexample);
  if (v.offending_parameter) out += ", 'parameter': '" + *v.offending_parameter + "'";
  out += ", 'checked': " + std::to_string(v.checked);
  out += ", 'maximal paths': " + std::to_string(v.maximal_paths);
  out += ", 'elapsed': " + format_seconds(v.elapsed) + "}";
  return out;
}

std::string verdict_json(const Verdict& v) {
  nlohmann::ordered_json j;
  j[v.property == Property::Liveness ? "live" : "safe"] = v.holds;
  if (v.reason) j["reason"] = *v.reason;
  if (v.counterexample) j["path"] = event_strings(*v.counterexample);
  if (v.offending_parameter) j["parameter"] = *v.offending_parameter;
  j["checked"] = v.checked;
  j["maximal paths"] = v.maximal_paths;
  j["elapsed"] = v.elapsed;
  return j.dump();
}

std::string render_path_stats(const PathStats& stats, double elapsed) {
  std::string out = std::to_string(stats.paths) + " paths, longest path: " +
                    std::to_string(stats.longest) +
                    ", maximal paths: " + std::to_string(stats.maximal_paths.size()) +
                    ", elapsed: " + format_seconds(elapsed) + "\n";
  for (const auto& p : stats.maximal_paths) out += to_string(p) + "\n";
  return out;
}

std::string path_stats_json(const PathStats& stats, double elapsed) {
  nlohmann::ordered_json j;
  j["paths"] = stats.paths;
  j["longest path"] = stats.longest;
  j["maximal paths"] = stats.maximal_paths.size();
  j["elapsed"] = elapsed;
  auto& list = j["maximal"] = nlohmann::ordered_json::array();
  for (const auto& p : stats.maximal_paths) list.push_back(event_strings(p));
  return j.dump();
}

}  // namespace iop
