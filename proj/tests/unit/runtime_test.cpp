#include <doctest.h>

#include "agentnet/agents.hpp"
#include "agentnet/control.hpp"
#include "agentnet/error.hpp"
#include "agentnet/facts.hpp"
#include "agentnet/orchestrator.hpp"
#include "agentnet/plan.hpp"
#include "agentnet/pps.hpp"
#include "agentnet/runtime.hpp"
#include "generators.hpp"

using namespace agentnet;

namespace {

errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return errc::file_error;
}

netsim::topology triangle(tick ab, tick bc, tick ac) {
  return netsim::load_topology(datum::parse(R"({
    "switches": ["a", "b", "c"],
    "hosts": {"ha": "a", "hb": "b", "hc": "c"},
    "links": [{"a": "a", "b": "b", "capacity": 10, "latency": )"
                                            + std::to_string(ab) + R"(},
              {"a": "b", "b": "c", "capacity": 10, "latency": )"
                                            + std::to_string(bc) + R"(},
              {"a": "a", "b": "c", "capacity": 10, "latency": )"
                                            + std::to_string(ac) + R"(}]})"));
}

/// Registry, Routing, Forwarding, one adapter per switch and a Session agent
/// acting as the requester. Southbound writes are recorded, not simulated.
struct chain_fixture {
  runtime rt;
  netsim::topology topo;
  std::vector<datum> southbound;
  agent_id routing = agent_id::of(function_kind::routing, 0);
  agent_id forwarding = agent_id::of(function_kind::forwarding, 0);
  agent_id session = agent_id::of(function_kind::session, 0);

  explicit chain_fixture(netsim::topology t, bool routing_topology = true)
    : topo(std::move(t)) {
    agents::install(rt);
    rt.set_effect("southbound", [this](runtime&, const agent_id&,
                                       const plan_step& step) {
      southbound.push_back(step.params);
      return std::vector<message>{};
    });
    rt.spawn_agent(agents::default_spec(agent_id::of(function_kind::registry, 0)));
    for (std::size_t i = 0; i < topo.switches.size(); ++i) {
      auto spec = agents::default_spec(
        agent_id::of(function_kind::switch_adapter, static_cast<std::uint32_t>(i)));
      spec.endpoint = "switch://" + topo.switches[i];
      spec.initial_facts = orchestration::initial_facts(
        function_kind::switch_adapter, {}, topo.switches[i]);
      rt.spawn_agent(spec);
    }
    auto r = agents::default_spec(routing);
    if (routing_topology)
      r.initial_facts["topology"] = topo.to_datum();
    rt.spawn_agent(r);
    auto f = agents::default_spec(forwarding);
    f.initial_facts["topology"] = topo.to_datum();
    rt.spawn_agent(f);
    rt.spawn_agent(agents::default_spec(session));
    run(3);
  }

  void run(int ticks) {
    for (int i = 0; i < ticks; ++i) {
      rt.deliver_due();
      rt.end_tick();
    }
    rt.deliver_due();
  }

  datum route_body(const std::string& src, const std::string& dst) {
    return datum{{"op", "route"},       {"session", 1},
                 {"src", src},          {"dst", dst},
                 {"class", "Interactive"}, {"reroute", false},
                 {"remove", datum::array()}, {"reply_to", to_string(session)}};
  }

  datum apply_body(std::vector<std::string> path) {
    return datum{{"op", "apply"},        {"session", 1},
                 {"src", "h-src"},       {"dst", "h-dst"},
                 {"class", "Interactive"}, {"path", path},
                 {"remove", datum::array()}, {"outcome", ""},
                 {"reply_to", to_string(session)}};
  }

  std::vector<const stage_record*> records_of(const agent_id& id) const {
    std::vector<const stage_record*> out;
    for (auto& r : rt.stage_log())
      if (r.agent == id)
        out.push_back(&r);
    return out;
  }

  bool violation_logged(const agent_id& id, const std::string& constraint) {
    for (auto* r : records_of(id))
      if (r->st == stage::validation && !r->passed
          && r->detail.find(constraint) != std::string::npos)
        return true;
    return false;
  }
};

/// Echo agent: the plan publishes the body back on a topic, or targets
/// whatever the test asks for.
struct echo_fixture {
  runtime rt;
  agent_id me = agent_id::of(function_kind::mobility, 0);
  agent_id sender = agent_id::of(function_kind::routing, 9);

  echo_fixture() {
    agents::install(rt);
    rt.cognitions().add("test.echo", [](const facts_store&, const message&,
                                        const datum& body) {
      return cognition_outcome{body, body.value("confidence", 1.0)};
    });
    rt.set_behavior(function_kind::mobility,
                    {nullptr, [](const cognition_outcome& out,
                                 const facts_store&, const message&,
                                 const datum&) {
                       plan p;
                       if (out.decision.contains("switch"))
                         p.steps.push_back({"install_rule",
                                            switch_ref{out.decision.at("switch")},
                                            datum::object()});
                       else if (out.decision.contains("publish"))
                         p.steps.push_back(
                           {"publish", topic{out.decision.at("publish")},
                            datum{{"body", out.decision}}});
                       return p;
                     }});
    auto spec = agents::default_spec(me);
    spec.cognition = "test.echo";
    rt.spawn_agent(spec);
    rt.spawn_agent(agents::default_spec(sender));
  }

  message to_me(const datum& body) {
    return rt.make(sender, me, message_kind::request, body);
  }
};

} // namespace

TEST_CASE("facts versions count writes per key") {
  facts_store f;
  CHECK(f.write("topology", 1, 0) == 1);
  CHECK(f.write("topology", 2, 1) == 2);
  CHECK(f.write("other", 3, 1) == 1);
  CHECK(f.version("topology") == 2);
  CHECK(f.version("absent") == 0);
  auto snap = f;
  f.write("topology", 4, 2);
  CHECK(*snap.get("topology") == 2);
  CHECK(facts_store::from_values(f.values(), 0).values() == f.values());
}

TEST_CASE("facts version sequences have no gaps") {
  testgen::rng_t rng{4};
  facts_store f;
  std::map<std::string, std::uint64_t> expect;
  for (int i = 0; i < 1000; ++i) {
    auto key = "k" + std::to_string(testgen::uniform(rng, 0, 9));
    CHECK(f.write(key, i, i) == ++expect[key]);
  }
}

TEST_CASE("update_facts on live and stopped agents") {
  echo_fixture e;
  CHECK(e.rt.update_facts(e.me, "topology", 1) == 1);
  CHECK(e.rt.update_facts(e.me, "topology", 2) == 2);
  e.rt.stop_agent(e.me);
  CHECK(code_of([&] { e.rt.update_facts(e.me, "topology", 3); })
        == errc::agent_not_live);
}

TEST_CASE("spawn registers, rejects duplicates and unknown cognitions") {
  runtime rt;
  agents::install(rt);
  rt.spawn_agent(agents::default_spec(agent_id::of(function_kind::registry, 0)));
  auto r = agent_id::of(function_kind::routing, 0);
  rt.spawn_agent(agents::default_spec(r));
  auto found = rt.discover(function_kind::routing, std::nullopt);
  REQUIRE(found.size() == 1);
  CHECK(found[0].agent == r);
  CHECK(code_of([&] { rt.spawn_agent(agents::default_spec(r)); })
        == errc::duplicate_agent);
  auto spec = agents::default_spec(agent_id::of(function_kind::routing, 1));
  spec.cognition = "nope";
  CHECK(code_of([&] { rt.spawn_agent(spec); }) == errc::unknown_cognition);
}

TEST_CASE("agents spawned before the registry are registered when it starts") {
  runtime rt;
  agents::install(rt);
  auto r = rt.spawn_agent(agents::default_spec(agent_id::of(function_kind::routing, 0)));
  CHECK(rt.discover(function_kind::routing, std::nullopt).empty());
  rt.spawn_agent(agents::default_spec(agent_id::of(function_kind::registry, 0)));
  CHECK(rt.discover(function_kind::routing, std::nullopt).at(0).agent == r);
}

TEST_CASE("validate_plan examples") {
  facts_store facts;
  facts.write("self", "Routing#0", 0);
  facts.write("peers", datum::array({{{"agent", "Forwarding#0"}}}), 0);
  auto fw = agent_id::of(function_kind::forwarding, 0);

  auto empty = validate_plan({}, facts, {});
  CHECK_FALSE(empty.passed);
  CHECK(empty.violations.at(0).constraint == "empty-plan");

  plan ok{{{"request", fw, datum::object()}}, {}};
  CHECK(validate_plan(ok, facts, {}).passed);
  CHECK(validate_plan(ok, facts, {}).violations.empty());

  std::vector<policy> deny{{"no-requests", gana_level::network,
                            {function_kind::routing},
                            {{policy_effect::deny, "request", target_class::agent}},
                            std::nullopt}};
  auto denied = validate_plan(ok, facts, deny);
  CHECK_FALSE(denied.passed);
  CHECK(denied.violations.at(0).constraint == "no-requests");

  std::vector<policy> allow{{"allow", gana_level::network,
                             {function_kind::routing},
                             {{policy_effect::allow, "*", target_class::any}},
                             std::nullopt}};
  CHECK(validate_plan(ok, facts, allow).passed);

  plan stranger{{{"request", agent_id::of(function_kind::qos, 4),
                  datum::object()}}, {}};
  CHECK(validate_plan(stranger, facts, {}).violations.at(0).constraint
        == "unknown-target");

  plan needs{{{"request", fw, datum::object()}}, {"topology"}};
  CHECK(validate_plan(needs, facts, {}).violations.at(0).constraint
        == "missing-topology");
}

TEST_CASE("validate_plan enforces a rule bound per switch") {
  facts_store facts;
  auto topo = triangle(1, 1, 1);
  facts.write("topology", topo.to_datum(), 0);
  facts.write("tables", datum{{"a", {1, 2, 3}}}, 0);
  auto rule = [](std::uint64_t id) {
    return datum{{"rule", {{"rule_id", id}, {"action", {{"forward", "b"}}}}}};
  };
  std::vector<policy> cap{{"cap4", gana_level::network,
                           {function_kind::forwarding}, {}, 4}};
  plan fourth{{{"install_rule", switch_ref{"a"}, rule(4)}}, {}};
  CHECK(validate_plan(fourth, facts, cap).passed);
  plan fifth{{{"install_rule", switch_ref{"a"}, rule(4)},
              {"install_rule", switch_ref{"a"}, rule(5)}}, {}};
  CHECK(validate_plan(fifth, facts, cap).violations.at(0).constraint == "cap4");
  plan swap{{{"remove_rule", switch_ref{"a"}, datum{{"rule_id", 1}}},
             {"install_rule", switch_ref{"a"}, rule(4)},
             {"install_rule", switch_ref{"a"}, rule(5)}}, {}};
  CHECK(validate_plan(swap, facts, cap).passed);
}

TEST_CASE("route request over a known topology yields installs along the shortest path") {
  testgen::rng_t rng{17};
  for (int trial = 0; trial < 15; ++trial) {
    auto topo = testgen::random_connected(
      rng, static_cast<int>(testgen::uniform(rng, 2, 8)),
      static_cast<int>(testgen::uniform(rng, 0, 6)), 5);
    chain_fixture f{topo};
    auto src = testgen::host_name(0);
    auto dst = testgen::host_name(static_cast<int>(topo.switches.size()) - 1);
    f.rt.inject(f.rt.make(f.session, f.routing, message_kind::request,
                          f.route_body(src, dst)));
    f.run(6);
    auto oracle = testgen::all_simple_paths_from(topo, topo.hosts.at(src));
    auto& best = oracle.at(topo.hosts.at(dst));
    REQUIRE(f.southbound.size() == best.nodes.size());
    for (std::size_t i = 0; i < best.nodes.size(); ++i) {
      CHECK(f.southbound[i].at("op") == "install_rule");
      CHECK(f.southbound[i].at("switch") == best.nodes[i]);
      auto fwd = f.southbound[i].at("rule").at("action").at("forward");
      CHECK(fwd == (i + 1 < best.nodes.size() ? datum(best.nodes[i + 1])
                                              : datum(dst)));
    }
    CHECK(f.rt.violation_count() == 0);
  }
}

TEST_CASE("plan targeting an unknown switch emits only a violation event") {
  chain_fixture f{triangle(1, 1, 3)};
  auto before = f.rt.stage_log().size();
  f.rt.inject(f.rt.make(f.session, f.forwarding, message_kind::request,
                        f.apply_body({"a", "zz"})));
  f.run(3);
  CHECK(f.southbound.empty());
  CHECK(f.rt.violation_count() == 1);
  CHECK(f.violation_logged(f.forwarding, "unknown-target"));
  for (auto i = before; i < f.rt.stage_log().size(); ++i) {
    auto& r = f.rt.stage_log()[i];
    if (r.agent == f.forwarding)
      CHECK(r.st != stage::output);
  }
}

TEST_CASE("path over a link the facts know is down fails validation") {
  auto topo = triangle(1, 1, 3);
  topo.find_link("a", "b")->up = false;
  chain_fixture f{topo};
  f.rt.inject(f.rt.make(f.session, f.forwarding, message_kind::request,
                        f.apply_body({"a", "b", "c"})));
  f.run(3);
  CHECK(f.southbound.empty());
  CHECK(f.violation_logged(f.forwarding, "stale-link"));
}

TEST_CASE("request with empty facts reports missing topology") {
  chain_fixture f{triangle(1, 1, 3), false};
  f.rt.inject(f.rt.make(f.session, f.routing, message_kind::request,
                        f.route_body("ha", "hc")));
  f.run(3);
  CHECK(f.southbound.empty());
  CHECK(f.violation_logged(f.routing, "missing-topology"));
}

TEST_CASE("pipeline runs the six stages in order") {
  echo_fixture e;
  auto out = e.rt.process_input(e.me, e.to_me({{"publish", "events.echo"}}));
  REQUIRE(out.size() == 1);
  std::vector<stage> seen;
  for (auto& r : e.rt.stage_log())
    if (r.agent == e.me)
      seen.push_back(r.st);
  CHECK(seen == std::vector{stage::input, stage::facts, stage::cognition,
                            stage::planning, stage::validation, stage::output});
  auto& last = e.rt.stage_log().back();
  CHECK(last.actions == std::vector{out[0].msg_id});
}

TEST_CASE("failed validation emits one diagnostic and no action") {
  echo_fixture e;
  auto in = e.to_me({{"switch", "nowhere"}});
  auto out = e.rt.process_input(e.me, in);
  REQUIRE(out.size() == 1);
  CHECK(out[0].kind == message_kind::event);
  CHECK(std::get<agent_id>(out[0].dst) == in.src);
  auto body = decode_body(out[0].payload);
  CHECK(body.at("op") == "violation");
  CHECK(body.at("violations").at(0).at("constraint") == "unknown-target");
  for (auto& r : e.rt.stage_log())
    CHECK(r.st != stage::output);

  auto self = e.rt.make(e.me, e.me, message_kind::event,
                        datum{{"switch", "nowhere"}});
  auto diag = e.rt.process_input(e.me, self);
  REQUIRE(diag.size() == 1);
  CHECK(std::get<topic>(diag[0].dst).name == "events.violation");
  CHECK(e.rt.violation_count() == 2);
}

TEST_CASE("low confidence escalates instead of planning") {
  echo_fixture e;
  e.rt.spawn_agent(agents::default_spec(agent_id::of(function_kind::fault, 0)));
  auto out = e.rt.process_input(
    e.me, e.to_me({{"publish", "events.echo"}, {"confidence", 0.2}}));
  CHECK(out.empty());
  e.rt.end_tick();
  e.rt.deliver_due();
  bool fault_got_it = false;
  for (auto& r : e.rt.stage_log())
    if (r.agent == agent_id::of(function_kind::fault, 0) && r.st == stage::input
        && r.detail.find("Request from Mobility#0") != std::string::npos)
      fault_got_it = true;
  CHECK(fault_got_it);
}

TEST_CASE("decode errors and dead agents") {
  echo_fixture e;
  auto bad = e.to_me({});
  bad.payload = {'{', '{'};
  CHECK(code_of([&] { e.rt.process_input(e.me, bad); }) == errc::decode_error);
  e.rt.stop_agent(e.me);
  CHECK(code_of([&] { e.rt.process_input(e.me, e.to_me({})); })
        == errc::agent_not_live);
}

TEST_CASE("repeated deliveries of one message are processed once") {
  echo_fixture e;
  auto in = e.to_me({{"publish", "events.echo"}});
  CHECK(e.rt.process_input(e.me, in).size() == 1);
  CHECK(e.rt.process_input(e.me, in).empty());
}

TEST_CASE("duplicate injection on reliable links never reaches a pipeline twice") {
  runtime_options opts;
  opts.duplicate = [](const message&) { return true; };
  opts.profiles = {pps::default_profiles()[0]};
  runtime rt{opts};
  agents::install(rt);
  rt.spawn_agent(agents::default_spec(agent_id::of(function_kind::registry, 0)));
  auto m = rt.spawn_agent(agents::default_spec(agent_id::of(function_kind::monitoring, 0)));
  for (int i = 0; i < 20; ++i)
    rt.send(rt.make(agent_id::of(function_kind::fault, 0), m,
                    message_kind::event, datum{{"n", i}}));
  for (int i = 0; i < 5; ++i) {
    rt.end_tick();
    rt.deliver_due();
  }
  std::set<std::pair<agent_id, std::uint64_t>> inputs;
  for (auto& r : rt.stage_log())
    if (r.st == stage::input)
      CHECK(inputs.insert({r.agent, r.input}).second);
}

TEST_CASE("process_input output is byte-identical across runs") {
  auto run_once = [] {
    echo_fixture e;
    std::vector<bytes> frames;
    for (int i = 0; i < 10; ++i)
      for (auto& m : e.rt.process_input(
             e.me, e.to_me({{"publish", "events.echo"}, {"i", i}})))
        frames.push_back(pps::encode(m, pps::default_profiles()[0]));
    return frames;
  };
  CHECK(run_once() == run_once());
}

TEST_CASE("killed agents hold their mail until redirected") {
  echo_fixture e;
  auto other = agent_id::of(function_kind::mobility, 1);
  auto spec = agents::default_spec(other);
  spec.cognition = "test.echo";
  e.rt.spawn_agent(spec);
  e.rt.kill_agent(e.me);
  e.rt.send(e.to_me({{"publish", "events.echo"}}));
  e.rt.end_tick();
  e.rt.deliver_due();
  CHECK_FALSE(e.rt.quiescent());
  e.rt.redirect(e.me, other);
  CHECK(e.rt.alias_of(e.me) == other);
  e.rt.end_tick();
  e.rt.deliver_due();
  CHECK(e.rt.quiescent());
  bool handled = false;
  for (auto& r : e.rt.stage_log())
    handled |= r.agent == other && r.st == stage::output;
  CHECK(handled);
}

TEST_CASE("abandoned agents drop held and later mail") {
  echo_fixture e;
  e.rt.kill_agent(e.me);
  e.rt.send(e.to_me({{"publish", "events.echo"}}));
  e.rt.end_tick();
  e.rt.deliver_due();
  CHECK_FALSE(e.rt.quiescent());
  CHECK(e.rt.abandon(e.me) == 1);
  CHECK(e.rt.quiescent());
  e.rt.send(e.to_me({{"publish", "events.echo"}}));
  e.rt.end_tick();
  e.rt.deliver_due();
  CHECK(e.rt.quiescent());
  CHECK_FALSE(e.rt.is_live(e.me));
}
