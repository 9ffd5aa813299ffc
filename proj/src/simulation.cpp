#include "iop/simulation.hpp"

#include <algorithm>

namespace iop {

Simulation::Simulation(SimConfig config, TimePoint start) : network_(config, start) {}

Adapter& Simulation::add_agent(const ProtocolSpec& spec, AgentConfig config) {
  const auto self = config.agents.find(config.role);
  if (self == config.agents.end())
    throw TransportError("no address for own role " + config.role);
  transports_.push_back(network_.bind(self->second));
  agents_.push_back(std::make_unique<Adapter>(spec, std::move(config), *transports_.back()));
  return *agents_.back();
}

void Simulation::start() {
  for (auto& a : agents_) a->start(network_.now());
}

void Simulation::tick_all(TimePoint t) {
  network_.advance_to(t);
  for (auto& a : agents_) a->tick(t);
}

void Simulation::run_until(TimePoint end, const std::function<bool()>& done) {
  using std::chrono::minutes;
  tick_all(network_.now());
  while (!(done && done())) {
    const auto now = network_.now();
    TimePoint next = std::chrono::floor<minutes>(now) + minutes(1);
    if (const auto d = network_.next_delivery()) next = std::min<TimePoint>(next, std::max(*d, now));
    if (next > end) break;
    tick_all(next);
  }
}

}  // namespace iop
