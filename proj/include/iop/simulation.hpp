#pragma once

// Several adapters sharing one SimNetwork and its virtual clock.

#include <functional>
#include <memory>
#include <vector>

#include "iop/adapter.hpp"
#include "iop/transport.hpp"

namespace iop {

class Simulation {
 public:
  explicit Simulation(SimConfig config, TimePoint start = TimePoint{});

  /// Binds config.agents[config.role] on the network.
  Adapter& add_agent(const ProtocolSpec& spec, AgentConfig config);

  /// start() on every agent at the current virtual time.
  void start();
  /// Steps the clock to each delivery and each minute boundary up to `end`,
  /// ticking every agent at each step. Returns early, at the step where it
  /// first holds, when `done` is given.
  void run_until(TimePoint end, const std::function<bool()>& done = {});

  TimePoint now() const { return network_.now(); }
  SimNetwork& network() { return network_; }
  std::vector<std::unique_ptr<Adapter>>& agents() { return agents_; }

 private:
  void tick_all(TimePoint t);

  SimNetwork network_;
  std::vector<std::unique_ptr<Transport>> transports_;
  std::vector<std::unique_ptr<Adapter>> agents_;
};

}  // namespace iop
