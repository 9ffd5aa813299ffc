// Acceptance gate: one PASS/FAIL line per criterion.
//   acceptance [--criterion N]

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "compliance.hpp"
#include "iop/script.hpp"
#include "iop/simulation.hpp"
#include "iop/verifier.hpp"
#include "oracle.hpp"
#include "paths.hpp"

using namespace iop;
using namespace std::chrono;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(steady_clock::time_point t0) {
  return duration<double>(steady_clock::now() - t0).count();
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

Path path_of(std::initializer_list<const char*> events) {
  Path p;
  for (const auto* e : events) p.events.push_back(parse_event(e));
  return p;
}

// 1. checked=7 and maximal paths=1 for both properties, under a second.
Outcome verdict_reproduction() {
  const auto t0 = steady_clock::now();
  const auto spec = load_protocol(demo_file("Flexible-Purchase.bspl"));
  const auto live = check_liveness(spec);
  const auto safe = check_safety(spec);
  const double wall = seconds_since(t0);
  const bool ok = live.holds && safe.holds && live.checked == 7 && safe.checked == 7 &&
                  live.maximal_paths == 1 && safe.maximal_paths == 1 && wall < 1.0;
  return {ok, "live=" + std::string(live.holds ? "True" : "False") + " safe=" + (safe.holds ? "True" : "False") +
                  " checked=" + std::to_string(live.checked) + "/" + std::to_string(safe.checked) +
                  " maximal paths=" + std::to_string(live.maximal_paths) + "/" +
                  std::to_string(safe.maximal_paths) + " wall=" + fmt(wall) + "s (limit 1s)"};
}

// 2. Buggy: failing verdicts, exact reasons, replayable counterexamples.
Outcome counterexample_reproduction() {
  const auto spec = load_protocol(demo_file("Buggy-Flexible-Purchase.bspl"));
  const auto live = check_liveness(spec);
  const auto safe = check_safety(spec);
  bool ok = !live.holds && live.reason == kLivenessReason && live.counterexample;
  if (ok) {
    try {
      view_state(spec, *live.counterexample);
      ok = is_maximal(spec, *live.counterexample) && !is_complete(spec, *live.counterexample);
    } catch (const EnactmentError&) {
      ok = false;
    }
  }
  bool sok = !safe.holds && safe.reason == kSafetyReason && safe.offending_parameter == "paid" &&
             safe.counterexample && safe.counterexample->contains(parse_event("B!Payment")) &&
             safe.counterexample->contains(parse_event("S!Shipment"));
  if (sok) {
    try {
      view_state(spec, *safe.counterexample);
    } catch (const EnactmentError&) {
      sok = false;
    }
  }
  return {ok && sok, "liveness path " + (live.counterexample ? to_string(*live.counterexample) : "none") +
                         "; safety parameter " + safe.offending_parameter.value_or("none") + " path " +
                         (safe.counterexample ? to_string(*safe.counterexample) : "none")};
}

// 3. Reduced verdicts equal exhaustive ones on the paper protocols and
// at least 200 random ones.
Outcome oracle_equivalence() {
  const auto t0 = steady_clock::now();
  std::vector<ProtocolSpec> specs{load_protocol(demo_file("Flexible-Purchase.bspl")),
                                  load_protocol(demo_file("Buggy-Flexible-Purchase.bspl"))};
  std::mt19937_64 rng(20240101);
  while (specs.size() < 2 + 500) specs.push_back(parse_protocol(oracle::random_protocol(rng, 4, 5, 6)));
  std::size_t agree = 0, live_fail = 0, safe_fail = 0;
  for (const auto& spec : specs) {
    const auto truth = oracle::explore(spec);
    const auto live = check_liveness(spec);
    const auto safe = check_safety(spec);
    agree += live.holds == truth.live && safe.holds == truth.safe;
    live_fail += !truth.live;
    safe_fail += !truth.safe;
  }
  const double wall = seconds_since(t0);
  return {agree == specs.size() && wall < 120.0,
          std::to_string(agree) + "/" + std::to_string(specs.size()) + " agree (" + std::to_string(live_fail) +
              " not live, " + std::to_string(safe_fail) + " unsafe) wall=" + fmt(wall) + "s (limit 120s)"};
}

// 4. all_paths: 10 maximal paths, longest 6, and the three enactments in
// which Payment precedes, follows and crosses Shipment.
Outcome enumeration_fidelity() {
  const auto spec = load_protocol(demo_file("Flexible-Purchase.bspl"));
  const auto stats = all_paths_report(spec);
  const auto extensions = oracle::linear_extensions(6, {{0, 1}, {0, 2}, {2, 3}, {1, 4}, {4, 5}});
  const std::vector<Path> figure{
      path_of({"B!Request", "S?Request", "S!Shipment", "B?Shipment", "B!Payment", "S?Payment"}),
      path_of({"B!Request", "B!Payment", "S?Request", "S?Payment", "S!Shipment", "B?Shipment"}),
      path_of({"B!Request", "S?Request", "B!Payment", "S!Shipment", "B?Shipment", "S?Payment"})};
  std::size_t found = 0;
  for (const auto& p : figure)
    found += std::count(stats.maximal_paths.begin(), stats.maximal_paths.end(), p) > 0;
  const auto permutation = oracle::count_by_permutation(spec);
  const bool ok = stats.maximal_paths.size() == 10 && extensions == 10 && stats.longest == 6 && found == 3;
  return {ok, "maximal paths=" + std::to_string(stats.maximal_paths.size()) + " (expected 10; dependency-order "
              "linear extensions=" + std::to_string(extensions) + "; permutation oracle under the enablement "
              "rule=" + std::to_string(permutation.maximal) + ") longest=" + std::to_string(stats.longest) +
              " figure enactments found=" + std::to_string(found) + "/3"};
}

// 5. The buyer state with two requests, one paid.
Outcome figure_three_forms() {
  const auto spec = load_protocol(demo_file("Flexible-Purchase.bspl"));
  LocalState s(spec);
  s.add({spec.name, "Request", "sys", {{"ID", "1"}, {"item", "fig"}}}, Direction::Sent);
  s.add({spec.name, "Request", "sys", {{"ID", "2"}, {"item", "jam"}}}, Direction::Sent);
  s.add({spec.name, "Payment", "sys", {{"ID", "1"}, {"item", "fig"}, {"paid", "10"}}}, Direction::Sent);
  const auto forms = enabled_forms(s, "B", spec, "sys");
  std::string listing;
  for (const auto& f : forms) {
    listing += " " + f.message + "(";
    for (const auto& [k, v] : f.bound) listing += k + "=" + v + " ";
    for (const auto& u : f.unbound) listing += u + "? ";
    listing += ")";
  }
  const auto req = forms.messages("Request");
  const auto pay = forms.messages("Payment");
  const bool ok = forms.size() == 2 && req.size() == 1 && req[0]->fresh && req[0]->bound.empty() &&
                  pay.size() == 1 && pay[0]->bound == Bindings{{"ID", "2"}, {"item", "jam"}} &&
                  pay[0]->unbound == std::vector<std::string>{"paid"};
  return {ok, std::to_string(forms.size()) + " forms:" + listing};
}

// 6. Permuted and duplicated deliveries leave the same state.
Outcome order_independence() {
  const auto spec = load_protocol(demo_file("Purchase.bspl"));
  const std::vector<MessageInstance> scenario{
      {spec.name, "Request", "sys", {{"ID", "1"}, {"item", "fig"}}},
      {spec.name, "Shipment", "sys", {{"ID", "1"}, {"item", "fig"}, {"status", "shipped"}}},
      {spec.name, "Payment", "sys", {{"ID", "1"}, {"item", "fig"}, {"paid", "10"}}}};
  std::vector<std::string> datagrams;
  for (const auto& m : scenario) datagrams.push_back(encode(m));
  const auto deliver = [&](const std::vector<std::size_t>& order, LocalState& seller, LocalState& buyer,
                           std::size_t& dups, bool& dup_ok) {
    std::vector<bool> seen(datagrams.size());
    for (auto i : order) {
      const auto& to = spec.message(scenario[i].message)->receiver;
      auto r = receive(datagrams[i], to == "Seller" ? seller : buyer, spec, to);
      if (seen[i]) {
        ++dups;
        dup_ok = dup_ok && std::holds_alternative<DuplicateIgnored>(r);
      } else {
        dup_ok = dup_ok && std::holds_alternative<Accepted>(r);
      }
      seen[i] = true;
    }
  };
  LocalState ref_seller(spec), ref_buyer(spec);
  std::size_t dups = 0;
  bool dup_ok = true;
  deliver({0, 1, 2}, ref_seller, ref_buyer, dups, dup_ok);

  std::mt19937_64 rng(6);
  std::size_t same = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::size_t> order{0, 1, 2};
    for (int extra = std::uniform_int_distribution<int>(0, 4)(rng); extra > 0; --extra)
      order.push_back(rng() % datagrams.size());
    std::shuffle(order.begin(), order.end(), rng);
    LocalState seller(spec), buyer(spec);
    deliver(order, seller, buyer, dups, dup_ok);
    same += seller == ref_seller && buyer == ref_buyer;
  }
  return {same == 1000 && dup_ok && ref_seller.size() == 2,
          std::to_string(same) + "/1000 identical seller states, " + std::to_string(dups) +
              " duplicate deliveries, all DuplicateIgnored: " + (dup_ok ? "yes" : "no")};
}

struct RunResult {
  bool complete;
  bool synced;
  std::size_t max_retransmissions;
  std::string compliance;
};

// 7. Lossy purchase with the demo scripts and reminder policies.
Outcome end_to_end_over_loss() {
  const auto t0 = steady_clock::now();
  const auto spec = load_protocol(demo_file("Purchase.bspl"));
  const auto buyer_rules = parse_script(slurp(demo_file("buyer.script")));
  const auto seller_rules = parse_script(slurp(demo_file("seller.script")));
  const auto buyer_policies = parse_policies(slurp(demo_file("buyer-policy.txt")), spec, "Buyer");
  const auto seller_policies = parse_policies(slurp(demo_file("seller-policy.txt")), spec, "Seller");
  const std::map<std::string, Endpoint> agents{{"Buyer", {"buyer", 1}}, {"Seller", {"seller", 1}}};

  std::size_t complete = 0, synced = 0, worst = 0;
  std::string compliance;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Simulation sim({0.5, 0.1, minutes(30), seed});
    auto& b = sim.add_agent(spec, {"Buyer", "sys", agents});
    auto& s = sim.add_agent(spec, {"Seller", "sys", agents});
    for (auto& r : make_decision_makers(buyer_rules, spec, "Buyer")) b.add(r);
    for (auto& r : make_decision_makers(seller_rules, spec, "Seller")) s.add(r);
    b.set_policies(buyer_policies);
    s.set_policies(seller_policies);
    std::vector<LogRecord> log;
    for (auto* a : {&b, &s}) a->set_log_sink([&](const LogRecord& r) { log.push_back(r); });
    sim.start();
    sim.run_until(TimePoint{} + days(14));

    // enactment completion: every parameter observed by some agent
    std::set<std::string> observed;
    for (const auto* a : {&b, &s})
      for (const auto& st : a->state().all())
        for (const auto& [p, v] : st.instance.bindings) observed.insert(p);
    complete += observed.size() == spec.parameters.size();
    synced += b.state().size() == 3 && s.state().size() == 3;

    std::map<std::string, std::size_t> per_instance;
    for (const auto& r : log)
      if (r.kind == "retransmit") worst = std::max(worst, ++per_instance[encode(*r.instance)]);
    compliance += compliance_errors(spec, log);
  }
  const double wall = seconds_since(t0);
  return {complete >= 95 && worst <= 5 && wall < 30.0 && compliance.empty(),
          "completed " + std::to_string(complete) + "/100 (need 95), both agents hold all three messages in " +
              std::to_string(synced) + "/100, max retransmissions per instance " + std::to_string(worst) +
              " (limit 5), compliance " + (compliance.empty() ? "ok" : "VIOLATED") + ", wall=" + fmt(wall) +
              "s (limit 30s)"};
}

const char* kCrossingBuyer = R"(- on: start
  send: Request
  bind: ID=1, item=fig
- on: start
  send: Payment
  bind: paid=10
)";
const char* kCrossingSeller = R"(- on: receive Request
  send: Shipment
  bind: status=shipped
)";

struct CrossingRun {
  LocalState buyer, seller;
  std::vector<LogRecord> log;
};

void wire_crossing(Adapter& b, Adapter& s, const ProtocolSpec& spec, std::vector<LogRecord>& log) {
  for (auto& r : make_decision_makers(parse_script(kCrossingBuyer), spec, "Buyer")) b.add(r);
  for (auto& r : make_decision_makers(parse_script(kCrossingSeller), spec, "Seller")) s.add(r);
  for (auto* a : {&b, &s}) a->set_log_sink([&](const LogRecord& r) { log.push_back(r); });
}

// Payment was sent before Shipment arrived, and Shipment before Payment.
bool crossed(const LocalState& buyer, const LocalState& seller) {
  const auto seq = [](const LocalState& st, const char* m, Direction d) -> std::optional<std::uint64_t> {
    for (const auto* x : st.messages(m))
      if (x->direction == d) return x->seq;
    return std::nullopt;
  };
  const auto pay_sent = seq(buyer, "Payment", Direction::Sent);
  const auto ship_recv = seq(buyer, "Shipment", Direction::Received);
  const auto ship_sent = seq(seller, "Shipment", Direction::Sent);
  const auto pay_recv = seq(seller, "Payment", Direction::Received);
  return pay_sent && ship_recv && ship_sent && pay_recv && *pay_sent < *ship_recv && *ship_sent < *pay_recv;
}

Outcome describe_crossing(const ProtocolSpec& spec, const LocalState& b, const LocalState& s,
                          const std::vector<LogRecord>& log, std::string extra) {
  const auto errors = compliance_errors(spec, log);
  const bool cross = crossed(b, s);
  return {b.size() == 3 && s.size() == 3 && cross && errors.empty(),
          "buyer " + std::to_string(b.size()) + " instances, seller " + std::to_string(s.size()) +
              " instances, crossed in flight: " + (cross ? "yes" : "no") + ", compliance " +
              (errors.empty() ? "ok" : "VIOLATED") + extra};
}

CrossingRun simulated_crossing(const ProtocolSpec& spec) {
  const std::map<std::string, Endpoint> agents{{"Buyer", {"buyer", 1}}, {"Seller", {"seller", 1}}};
  Simulation sim({0.0, 0.0, milliseconds(0), 8});
  auto& b = sim.add_agent(spec, {"Buyer", "sys", agents});
  auto& s = sim.add_agent(spec, {"Seller", "sys", agents});
  CrossingRun run{LocalState(spec), LocalState(spec), {}};
  wire_crossing(b, s, spec, run.log);
  sim.start();
  sim.run_until(TimePoint{} + hours(1));
  run.buyer = b.state();
  run.seller = s.state();
  return run;
}

// 8. Payment and Shipment cross in flight on the simulator.
Outcome concurrent_emission() {
  const auto spec = load_protocol(demo_file("Purchase.bspl"));
  const auto run = simulated_crossing(spec);
  return describe_crossing(spec, run.buyer, run.seller, run.log, "");
}

// 9. The same over loopback UDP.
Outcome udp_smoke() {
  const auto spec = load_protocol(demo_file("Purchase.bspl"));
  const auto reference = simulated_crossing(spec);
  UdpTransport bt({"127.0.0.1", 0});
  UdpTransport st({"127.0.0.1", 0});
  const std::map<std::string, Endpoint> agents{{"Buyer", bt.local_endpoint()}, {"Seller", st.local_endpoint()}};
  Adapter b(spec, {"Buyer", "sys", agents}, bt);
  Adapter s(spec, {"Seller", "sys", agents}, st);
  std::vector<LogRecord> log;
  wire_crossing(b, s, spec, log);
  const auto now = [] { return time_point_cast<milliseconds>(system_clock::now()); };
  const auto t0 = steady_clock::now();
  s.start(now());
  b.start(now());
  while ((b.state().size() < 3 || s.state().size() < 3) && seconds_since(t0) < 10.0) {
    s.tick(now());
    b.tick(now());
    std::this_thread::sleep_for(milliseconds(2));
  }
  const bool same = b.state() == reference.buyer && s.state() == reference.seller;
  auto out = describe_crossing(spec, b.state(), s.state(), log,
                               std::string(", final states equal the simulated run: ") + (same ? "yes" : "no"));
  out.pass = out.pass && same;
  return out;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "Run a single criterion (1-9)")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "verdict reproduction", verdict_reproduction},
      {2, "counterexample reproduction", counterexample_reproduction},
      {3, "oracle equivalence", oracle_equivalence},
      {4, "enumeration fidelity", enumeration_fidelity},
      {5, "enabled forms for the two-request buyer", figure_three_forms},
      {6, "order independence and idempotence", order_independence},
      {7, "end to end over loss", end_to_end_over_loss},
      {8, "concurrent emission tolerance", concurrent_emission},
      {9, "UDP smoke test", udp_smoke},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail
              << std::endl;
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
