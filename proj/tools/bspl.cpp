// bspl: verify information protocols and run demo agents.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "iop/adapter.hpp"
#include "iop/script.hpp"
#include "iop/simulation.hpp"
#include "iop/verifier.hpp"

namespace fs = std::filesystem;
using namespace iop;

namespace {

constexpr int kHolds = 0;
constexpr int kFails = 1;
constexpr int kBadInput = 2;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void print_diagnostics(const std::vector<Diagnostic>& ds, std::ostream& out) {
  for (const auto& d : ds) out << to_string(d.severity) << ": " << d.message << "\n";
}

// Loads and validates; prints problems and returns nullopt on failure.
std::optional<ProtocolSpec> load_checked(const std::string& file) {
  try {
    auto spec = load_protocol(file);
    const auto ds = validate_protocol(spec);
    if (has_errors(ds)) {
      print_diagnostics(ds, std::cerr);
      return std::nullopt;
    }
    return spec;
  } catch (const ProtocolError& e) {
    std::cerr << file << ": " << e.what() << "\n";
    return std::nullopt;
  }
}

int cmd_verify(const std::string& kind, const std::string& file, bool structured) {
  const auto spec = load_checked(file);
  if (!spec) return kBadInput;
  if (kind == "all_paths") {
    double elapsed = 0;
    const auto stats = all_paths_report(*spec, &elapsed);
    std::cout << (structured ? path_stats_json(stats, elapsed) : render_path_stats(stats, elapsed)) << "\n";
    return kHolds;
  }
  const auto v = kind == "liveness" ? check_liveness(*spec) : check_safety(*spec);
  std::cout << (structured ? verdict_json(v) : render_verdict(v)) << "\n";
  return v.holds ? kHolds : kFails;
}

int cmd_check(const std::string& file, bool structured) {
  ProtocolSpec spec;
  try {
    spec = load_protocol(file);
  } catch (const ProtocolError& e) {
    std::cerr << file << ": " << e.what() << "\n";
    return kBadInput;
  }
  const auto ds = validate_protocol(spec);
  if (structured) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& d : ds) j.push_back({{"severity", to_string(d.severity)}, {"message", d.message}});
    std::cout << j.dump() << "\n";
  } else {
    print_diagnostics(ds, std::cout);
    if (!has_errors(ds)) std::cout << spec.name << ": ok\n";
  }
  return has_errors(ds) ? kBadInput : kHolds;
}

int cmd_format(const std::string& file) {
  try {
    std::cout << format_protocol(load_protocol(file));
    return kHolds;
  } catch (const ProtocolError& e) {
    std::cerr << file << ": " << e.what() << "\n";
    return kBadInput;
  }
}

struct AgentOptions {
  std::string protocol;
  std::string role;
  std::string config;
  std::string policies;
  std::string script;
  bool sim = false;
  std::uint64_t seed = 0;
  double loss = 0.0;
  double dup = 0.0;
  int max_delay_ms = 1000;
  double days = 10;
  double duration = 0;
  bool stop_when_complete = false;
};

struct RoleSetup {
  AgentConfig config;
  std::vector<DecisionMakerRegistration> registrations;
  std::vector<Policy> policies;
};

// Everything is loaded and validated before any endpoint is bound.
struct Loaded {
  ProtocolSpec spec;
  std::vector<RoleSetup> roles;  // the requested role first
};

fs::path relative_to(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

Loaded load_agents(const AgentOptions& o) {
  const fs::path config_path(o.config);
  const auto base = config_path.parent_path();
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(read_file(config_path));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(o.config + ": " + e.what());
  }
  if (!cfg.is_object()) throw std::runtime_error(o.config + ": expected a JSON object");

  const auto text = [&](const char* key) -> std::string {
    return cfg.contains(key) && cfg[key].is_string() ? cfg[key].get<std::string>() : std::string();
  };
  Loaded out;
  const auto protocol_file = !o.protocol.empty() ? fs::path(o.protocol) : relative_to(base, text("protocol"));
  if (protocol_file.empty()) throw std::runtime_error("no protocol given");
  out.spec = load_protocol(protocol_file);
  if (const auto ds = validate_protocol(out.spec); has_errors(ds)) {
    std::ostringstream s;
    print_diagnostics(ds, s);
    throw std::runtime_error("invalid protocol:\n" + s.str());
  }

  const auto role = !o.role.empty() ? o.role : text("role");
  if (role.empty()) throw std::runtime_error("no role given");
  if (!out.spec.has_role(role)) throw std::runtime_error("role " + role + " is not in " + out.spec.name);
  const auto system = text("system").empty() ? std::string("default") : text("system");

  std::map<std::string, Endpoint> agents;
  if (!cfg.contains("agents") || !cfg["agents"].is_object())
    throw std::runtime_error(o.config + ": agents must map roles to host:port");
  for (const auto& [r, addr] : cfg["agents"].items()) {
    if (!addr.is_string()) throw std::runtime_error("agents." + r + " must be a string");
    agents[r] = Endpoint::parse(addr.get<std::string>());
  }
  for (const auto& m : out.spec.messages)
    for (const auto* r : {&m.sender, &m.receiver})
      if (!agents.count(*r)) throw std::runtime_error("no address for role " + *r);

  const auto per_role = [&](const char* key, const std::string& r) -> std::string {
    if (!cfg.contains(key)) return {};
    const auto& map = cfg[key];
    if (!map.is_object() || !map.contains(r)) return {};
    return relative_to(base, map[r].get<std::string>()).string();
  };

  std::vector<std::string> roles{role};
  if (o.sim)
    for (const auto& r : out.spec.roles)
      if (r != role) roles.push_back(r);
  for (const auto& r : roles) {
    RoleSetup setup{{r, system, agents}, {}, {}};
    const auto script = r == role && !o.script.empty() ? o.script : per_role("scripts", r);
    const auto policies = r == role && !o.policies.empty() ? o.policies : per_role("policies", r);
    if (!script.empty())
      setup.registrations = make_decision_makers(parse_script(read_file(script)), out.spec, r);
    if (!policies.empty()) setup.policies = parse_policies(read_file(policies), out.spec, r);
    out.roles.push_back(std::move(setup));
  }
  return out;
}

void emit_log(const LogRecord& r) { std::cout << to_json(r) << std::endl; }

bool locally_complete(const Adapter& a) {
  const auto keys = a.state().enactments(a.config().system);
  if (keys.empty()) return false;
  for (const auto& k : keys) {
    const auto* known = a.state().knowledge(k);
    for (const auto& p : a.spec().parameters)
      if (!known || !known->count(p.name)) return false;
  }
  return true;
}

void print_final(const Adapter& a) {
  nlohmann::ordered_json j;
  j["event"] = "final";
  j["agent"] = a.config().role;
  j["instances"] = a.state().size();
  j["retransmissions"] = a.retransmissions();
  j["complete"] = locally_complete(a);
  std::cout << j.dump() << std::endl;
}

int cmd_agent_run(const AgentOptions& o) {
  Loaded loaded;
  try {
    loaded = load_agents(o);
  } catch (const std::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kBadInput;
  }

  if (o.sim) {
    SimConfig sc{o.loss, o.dup, std::chrono::milliseconds(o.max_delay_ms), o.seed};
    try {
      sc.validate();
    } catch (const std::exception& e) {
      std::cerr << "configuration error: " << e.what() << "\n";
      return kBadInput;
    }
    Simulation sim(sc, std::chrono::time_point_cast<std::chrono::milliseconds>(
                           std::chrono::sys_days{std::chrono::year{2024} / 1 / 1}));
    std::vector<Adapter*> agents;
    for (auto& r : loaded.roles) {
      auto& a = sim.add_agent(loaded.spec, r.config);
      for (auto& reg : r.registrations) a.add(std::move(reg));
      a.set_policies(r.policies);
      a.set_log_sink(emit_log);
      agents.push_back(&a);
    }
    const auto end = sim.now() + std::chrono::duration_cast<std::chrono::milliseconds>(
                                     std::chrono::duration<double, std::ratio<86400>>(o.days));
    sim.start();
    sim.run_until(end, [&] {
      if (!o.stop_when_complete) return false;
      for (const auto* a : agents)
        if (!locally_complete(*a)) return false;
      return true;
    });
    for (const auto* a : agents) print_final(*a);
    return 0;
  }

  auto& setup = loaded.roles.front();
  std::unique_ptr<UdpTransport> transport;
  try {
    transport = std::make_unique<UdpTransport>(setup.config.agents.at(setup.config.role));
  } catch (const TransportError& e) {
    std::cerr << "cannot bind: " << e.what() << "\n";
    return kBadInput;
  }
  Adapter adapter(loaded.spec, setup.config, *transport);
  for (auto& reg : setup.registrations) adapter.add(std::move(reg));
  adapter.set_policies(setup.policies);
  adapter.set_log_sink(emit_log);

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const auto now = [] {
    return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
  };
  const auto started = std::chrono::steady_clock::now();
  const auto limit = std::chrono::duration<double>(o.duration);
  adapter.start(now());
  while (!g_stop) {
    adapter.tick(now());
    if (o.stop_when_complete && locally_complete(adapter)) break;
    if (o.duration > 0 && std::chrono::steady_clock::now() - started >= limit) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  print_final(adapter);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verify information protocols and run protocol-compliant agents"};
  app.require_subcommand(1);

  std::string kind, file, format = "text";
  auto* verify = app.add_subcommand("verify", "Check liveness or safety, or enumerate all paths");
  verify->add_option("property", kind, "liveness, safety or all_paths")
      ->required()
      ->check(CLI::IsMember({"liveness", "safety", "all_paths"}));
  verify->add_option("file", file, "Protocol file")->required();
  verify->add_option("--format", format, "text or structured")->check(CLI::IsMember({"text", "structured"}));

  auto* check = app.add_subcommand("check", "Parse and validate a protocol");
  check->add_option("file", file, "Protocol file")->required();
  check->add_option("--format", format, "text or structured")->check(CLI::IsMember({"text", "structured"}));

  auto* fmt = app.add_subcommand("format", "Print a protocol in canonical form");
  fmt->add_option("file", file, "Protocol file")->required();

  AgentOptions ao;
  auto* agent = app.add_subcommand("agent", "Run agents");
  agent->require_subcommand(1);
  auto* run = agent->add_subcommand("run", "Run an agent until stopped");
  run->add_option("--protocol", ao.protocol, "Protocol file (default: from config)");
  run->add_option("--role", ao.role, "Role to play (default: from config)");
  run->add_option("--config", ao.config, "Agent configuration (JSON)")->required();
  run->add_option("--policies", ao.policies, "Reminder policy file for the role");
  run->add_option("--script", ao.script, "Decision-maker script for the role");
  run->add_flag("--sim", ao.sim, "Run every configured role on a simulated network");
  run->add_option("--seed", ao.seed, "Simulator seed");
  run->add_option("--loss", ao.loss, "Simulated loss probability")->check(CLI::Range(0.0, 1.0));
  run->add_option("--dup", ao.dup, "Simulated duplication probability")->check(CLI::Range(0.0, 1.0));
  run->add_option("--max-delay", ao.max_delay_ms, "Simulated maximum delay in ms")->check(CLI::NonNegativeNumber);
  run->add_option("--days", ao.days, "Simulated days to run")->check(CLI::PositiveNumber);
  run->add_option("--duration", ao.duration, "Stop after this many seconds (real network)");
  run->add_flag("--stop-when-complete", ao.stop_when_complete,
                "Stop once every known enactment binds all parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kBadInput;
  }

  if (*verify) return cmd_verify(kind, file, format == "structured");
  if (*check) return cmd_check(file, format == "structured");
  if (*fmt) return cmd_format(file);
  return cmd_agent_run(ao);
}
