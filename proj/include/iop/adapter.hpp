#pragma once

// Protocol adapter: owns an agent's local state, feeds decision makers with
// enabled forms, checks their attempts and moves messages over a Transport.

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <stop_token>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "iop/cron.hpp"
#include "iop/forms.hpp"
#include "iop/local_state.hpp"
#include "iop/message.hpp"
#include "iop/protocol.hpp"
#include "iop/resilience.hpp"
#include "iop/transport.hpp"

namespace iop {

struct AgentConfig {
  std::string role;
  std::string system;
  std::map<std::string, Endpoint> agents;  // role -> address
};

struct Trigger {
  enum class Kind { Start, Receive, Cron };
  Kind kind = Kind::Start;
  std::string message;    // Receive
  CronSchedule schedule;  // Cron

  static Trigger on_start() { return {}; }
  static Trigger on_receive(std::string message) { return {Kind::Receive, std::move(message), {}}; }
  /// Throws CronError.
  static Trigger cron(std::string_view expr) { return {Kind::Cron, {}, CronSchedule::parse(expr)}; }
};

using DecisionMaker = std::function<std::vector<Attempt>(const EnabledForms&, const LocalState&)>;

struct DecisionMakerRegistration {
  std::string name;
  Trigger trigger;
  DecisionMaker body;
};

struct LogRecord {
  TimePoint time;
  std::string agent;
  std::string kind;  // emit accept duplicate reject retransmit send-error decision-error check-failed
  std::string message;
  std::string detail;
  std::optional<MessageInstance> instance;  // emit, accept, duplicate, retransmit
};

std::string to_json(const LogRecord& r);

struct Accepted {
  MessageInstance instance;
};
struct DuplicateIgnored {
  MessageInstance instance;
};
struct Rejected {
  std::string reason;
};
using ReceiveOutcome = std::variant<Accepted, DuplicateIgnored, Rejected>;

/// Validates an inbound datagram for `role` and stores it on acceptance.
ReceiveOutcome receive(std::string_view datagram, LocalState& state, const ProtocolSpec& spec,
                       std::string_view role);

struct CommitResult {
  std::vector<Violation> violations;  // nonempty: nothing was committed
  std::vector<MessageInstance> emitted;
  std::vector<std::string> send_errors;

  bool committed() const { return violations.empty(); }
};

/// check, then for each attempt: add to state, encode, send. Send failures
/// are reported but state is kept.
CommitResult commit_and_emit(const std::vector<Attempt>& attempts, LocalState& state,
                             const ProtocolSpec& spec, const AgentConfig& config,
                             Transport& transport);

class Adapter {
 public:
  using LogSink = std::function<void(const LogRecord&)>;

  /// `spec` and `transport` must outlive the adapter.
  Adapter(const ProtocolSpec& spec, AgentConfig config, Transport& transport);

  void add(DecisionMakerRegistration registration);
  void set_policies(std::vector<Policy> policies) { policies_ = std::move(policies); }
  void set_log_sink(LogSink sink) { sink_ = std::move(sink); }
  /// On a duplicate from a peer, resend own later messages of that
  /// enactment to the peer. On by default.
  void set_answer_reminders(bool on, int budget = 5) {
    answer_reminders_ = on;
    answer_budget_ = budget;
  }

  /// Fires START registrations. Cron minutes are counted from the next
  /// minute after `now`.
  void start(TimePoint now);
  /// Drains the transport, then runs cron registrations and policies for
  /// every minute boundary passed since the previous tick.
  void tick(TimePoint now);
  /// Real-time loop on the system clock.
  void run(std::stop_token stop, std::chrono::milliseconds poll = std::chrono::milliseconds(5));

  CommitResult invoke(const DecisionMakerRegistration& registration, TimePoint now);

  const LocalState& state() const { return state_; }
  const RetryLedger& ledger() const { return ledger_; }
  const AgentConfig& config() const { return config_; }
  const ProtocolSpec& spec() const { return spec_; }
  std::size_t retransmissions() const { return retransmissions_; }

 private:
  void log(TimePoint t, std::string kind, std::string message, std::string detail = {},
           std::optional<MessageInstance> instance = std::nullopt);
  void handle(const Datagram& d, TimePoint now);
  void answer(const MessageInstance& duplicate, TimePoint now);
  void resend(const MessageInstance& m, TimePoint now, std::string_view why);
  void run_minute(MinutePoint minute);

  const ProtocolSpec& spec_;
  AgentConfig config_;
  Transport& transport_;
  LocalState state_;
  RetryLedger ledger_;
  std::vector<DecisionMakerRegistration> registrations_;
  std::vector<Policy> policies_;
  LogSink sink_;
  bool answer_reminders_ = true;
  int answer_budget_ = 5;
  std::optional<MinutePoint> last_minute_;
  std::size_t retransmissions_ = 0;
};

}  // namespace iop
