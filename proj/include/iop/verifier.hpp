#pragma once

// Safety and liveness checking over canonical enactments.
//
// The reduction classifies every schema event as VISIBLE or INVISIBLE. An
// invisible event can neither be disabled by nor disable any other event, so
// from any state it can be scheduled first without losing a reachable
// terminal state. The search therefore takes a single invisible event when
// one is enabled and branches only where every enabled event is visible.
// Because both properties are decided by terminal states (unsafety is
// preserved by extension), checking canonical enactments is exact.

#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "iop/enactment.hpp"
#include "iop/protocol.hpp"

namespace iop {

enum class Property { Safety, Liveness };

struct Verdict {
  Property property = Property::Liveness;
  bool holds = true;
  std::optional<std::string> reason;
  std::optional<Path> counterexample;
  std::optional<std::string> offending_parameter;
  std::size_t checked = 0;
  std::size_t maximal_paths = 0;
  double elapsed = 0.0;  // seconds
};

inline constexpr const char* kLivenessReason = "Found path that does not extend to completion";
inline constexpr const char* kSafetyReason = "Found parameter with multiple sources in a path";

class VerificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConflictRelation {
 public:
  explicit ConflictRelation(const EventModel& model);

  /// Parameters adorned OUT in at least two messages.
  const std::set<std::string>& conflicted() const { return names_; }
  bool visible(std::size_t event) const { return visible_.at(event); }

 private:
  std::set<std::string> names_;
  std::vector<bool> visible_;
};

struct ExplorationResult {
  std::size_t states_checked = 0;  // distinct event sets, the empty one included
  std::vector<Path> canonical_maximal_paths;
};

ExplorationResult canonical_explore(const ProtocolSpec& spec);

Verdict check_liveness(const ProtocolSpec& spec);
Verdict check_safety(const ProtocolSpec& spec);

/// No parameter has two OUT sources, so no enactment can bind one twice.
bool trivially_safe(const ProtocolSpec& spec);

/// Unreduced enumeration; `elapsed` receives the wall time in seconds.
PathStats all_paths_report(const ProtocolSpec& spec, double* elapsed = nullptr);

/// `{'live': True, 'checked': 7, 'maximal paths': 1, 'elapsed': ...}`
std::string render_verdict(const Verdict& v);
/// Same keys as render_verdict, as a JSON object.
std::string verdict_json(const Verdict& v);

/// Summary line `N paths, longest path: L, maximal paths: M, elapsed: T`
/// followed by one maximal path per line.
std::string render_path_stats(const PathStats& stats, double elapsed);
std::string path_stats_json(const PathStats& stats, double elapsed);

}  // namespace iop
