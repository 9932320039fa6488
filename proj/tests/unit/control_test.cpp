#include <doctest.h>

#include "agentnet/control.hpp"
#include "agentnet/error.hpp"
#include "generators.hpp"

using namespace agentnet;
using namespace agentnet::control;

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

netsim::topology triangle(tick ab = 1, tick bc = 1, tick ac = 3) {
  netsim::topology t;
  t.switches = {"A", "B", "C"};
  t.hosts = {{"hA", "A"}, {"hB", "B"}, {"hC", "C"}};
  t.links = {{"A", "B", 10, ab, true},
             {"A", "C", 10, ac, true},
             {"B", "C", 10, bc, true}};
  return t;
}

/// s1 - s2 - s3 with a detour s2 - s4 - s3 and a pendant s5 behind s1.
netsim::topology detour() {
  netsim::topology t;
  t.switches = {"s1", "s2", "s3", "s4", "s5"};
  t.hosts = {{"h1", "s1"}, {"h3", "s3"}, {"h5", "s5"}};
  t.links = {{"s1", "s2", 10, 1, true},
             {"s2", "s3", 10, 1, true},
             {"s2", "s4", 10, 1, true},
             {"s3", "s4", 10, 1, true},
             {"s1", "s5", 10, 1, true}};
  std::sort(t.links.begin(), t.links.end(), [](auto& x, auto& y) {
    return std::tie(x.a, x.b) < std::tie(y.a, y.b);
  });
  return t;
}

} // namespace

TEST_CASE("compute_path examples") {
  auto t = triangle();
  CHECK(compute_path(t, "A", "A") == path_result{{"A"}, 0});
  CHECK(compute_path(t, "A", "C") == path_result{{"A", "B", "C"}, 2});
  CHECK(compute_path(t, "C", "A") == path_result{{"C", "B", "A"}, 2});
  t.links[2].up = false;
  CHECK(compute_path(t, "A", "C") == path_result{{"A", "C"}, 3});
  t.links[1].up = false;
  CHECK(code_of([&] { compute_path(t, "A", "C"); }) == errc::no_path);
  CHECK(code_of([&] { compute_path(t, "A", "Z"); }) == errc::unknown_node);
  CHECK(code_of([&] { compute_path(t, "Z", "A"); }) == errc::unknown_node);
}

TEST_CASE("equal-cost paths tie-break on the node sequence") {
  auto t = triangle(1, 1, 2);
  CHECK(compute_path(t, "A", "C").nodes == std::vector<std::string>{"A", "B", "C"});
  netsim::topology sq;
  sq.switches = {"a", "b", "c", "d"};
  sq.links = {{"a", "b", 1, 1, true}, {"a", "c", 1, 1, true},
              {"b", "d", 1, 1, true}, {"c", "d", 1, 1, true}};
  CHECK(compute_path(sq, "a", "d").nodes == std::vector<std::string>{"a", "b", "d"});
  CHECK(compute_path(sq, "d", "a").nodes == std::vector<std::string>{"d", "b", "a"});
}

TEST_CASE("compute_path matches exhaustive enumeration") {
  testgen::rng_t rng{41};
  for (int g = 0; g < 300; ++g) {
    auto n = static_cast<int>(testgen::uniform(rng, 1, 8));
    auto t = testgen::random_graph(rng, n, 0.4, 4, 0.2);
    for (auto& src : t.switches) {
      auto best = testgen::all_simple_paths_from(t, src);
      for (auto& dst : t.switches) {
        auto it = best.find(dst);
        if (it == best.end()) {
          CHECK(code_of([&] { compute_path(t, src, dst); }) == errc::no_path);
          continue;
        }
        auto got = compute_path(t, src, dst);
        CHECK(got.cost == it->second.cost);
        CHECK(got.nodes == it->second.nodes);
      }
    }
  }
}

TEST_CASE("path helpers") {
  std::vector<std::string> p{"s3", "s1", "s2"};
  auto links = path_links(p);
  REQUIRE(links.size() == 2);
  CHECK(links[0] == std::pair<std::string, std::string>{"s1", "s3"});
  CHECK(path_uses(p, "s2", "s1"));
  CHECK_FALSE(path_uses(p, "s2", "s3"));
  CHECK(path_links({"s1"}).empty());
}

TEST_CASE("rules_for_path") {
  auto rules = rules_for_path({{"A", "B", "C"}, 2}, "hA", "hC");
  REQUIRE(rules.size() == 3);
  CHECK(rules[0].sw == "A");
  CHECK(rules[0].forward == "B");
  CHECK(rules[1].forward == "C");
  CHECK(rules[2].forward == "hC");
  for (auto& r : rules) {
    CHECK(r.match.src == "hA");
    CHECK(r.match.dst == "hC");
    CHECK(r.priority == 10);
    CHECK(r.rule_id == 0);
  }
  auto single = rules_for_path({{"A"}, 0}, "hA", "hA2", 4);
  REQUIRE(single.size() == 1);
  CHECK(single[0].forward == "hA2");
  CHECK(single[0].priority == 4);
}

TEST_CASE("classifier thresholds") {
  classifier_config cfg;
  CHECK(classify_flow({41, 5, ""}, cfg) == flow_class::bulk);
  CHECK(classify_flow({40, 5, ""}, cfg) == flow_class::interactive);
  CHECK(classify_flow({10, 1, ""}, cfg) == flow_class::realtime);
  CHECK(classify_flow({10, 2, ""}, cfg) == flow_class::interactive);
  CHECK(classify_flow({100, 1, "RealTime"}, cfg) == flow_class::bulk);
  CHECK(class_from_hint("RealTime") == flow_class::realtime);
  CHECK(class_from_hint("nonsense") == flow_class::interactive);
  for (auto c : {flow_class::bulk, flow_class::interactive, flow_class::realtime})
    CHECK(parse_flow_class(to_string(c)) == c);
  CHECK_FALSE(parse_flow_class("bulk"));
}

TEST_CASE("classifier agrees with labels on synthetic flows") {
  testgen::rng_t rng{42};
  classifier_config cfg{30, 3};
  int correct = 0;
  for (int i = 0; i < 200; ++i) {
    flow_class label;
    flow_features f;
    switch (testgen::uniform(rng, 0, 2)) {
      case 0:
        label = flow_class::bulk;
        f = {testgen::uniform(rng, 31, 500), testgen::uniform(rng, 1, 9), ""};
        break;
      case 1:
        label = flow_class::realtime;
        f = {testgen::uniform(rng, 1, 30), testgen::uniform(rng, 0, 2), ""};
        break;
      default:
        label = flow_class::interactive;
        f = {testgen::uniform(rng, 1, 30), testgen::uniform(rng, 3, 9), ""};
    }
    correct += classify_flow(f, cfg) == label;
  }
  CHECK(correct == 200);
}

TEST_CASE("qos admission respects the cap") {
  netsim::topology t;
  t.switches = {"a", "b"};
  t.links = {{"a", "b", 10, 1, true}};
  qos_book book{{80, 1}};
  std::vector<std::string> path{"a", "b"};
  for (std::uint64_t s = 1; s <= 8; ++s)
    CHECK(book.admit(s, flow_class::realtime, path, t));
  CHECK_FALSE(book.admit(9, flow_class::realtime, path, t));
  CHECK(book.reserved("b", "a") == 8);
  CHECK(book.admit(9, flow_class::bulk, path, t));
  CHECK_FALSE(book.holds(9));
  book.release(3);
  CHECK(book.admit(9, flow_class::realtime, path, t));
  CHECK(book.admit(9, flow_class::realtime, path, t));
  CHECK(book.reserved("a", "b") == 8);
  CHECK(qos_book::from_datum(book.to_datum(), {80, 1}).reserved("a", "b") == 8);
  CHECK(book.admit(10, flow_class::realtime, {"a"}, t));
}

TEST_CASE("qos reservations never exceed the cap") {
  testgen::rng_t rng{43};
  for (int g = 0; g < 50; ++g) {
    auto t = testgen::random_connected(rng, 6, 4, 3,
                                       testgen::uniform(rng, 1, 12));
    auto cap = static_cast<int>(testgen::uniform(rng, 10, 100));
    qos_book book{{cap, 1}};
    std::vector<std::uint64_t> live;
    for (std::uint64_t s = 1; s <= 60; ++s) {
      if (!live.empty() && testgen::coin(rng, 0.3)) {
        book.release(live.back());
        live.pop_back();
      }
      auto a = t.switches[static_cast<std::size_t>(testgen::uniform(rng, 0, 5))];
      auto b = t.switches[static_cast<std::size_t>(testgen::uniform(rng, 0, 5))];
      if (book.admit(s, flow_class::realtime, compute_path(t, a, b).nodes, t))
        live.push_back(s);
      for (auto& l : t.links)
        CHECK(book.reserved(l.a, l.b) * 100 <= cap * l.capacity);
    }
  }
}

TEST_CASE("create then remove restores empty tables") {
  controller c{detour()};
  auto& s = c.create_session("h1", "h3", flow_class::interactive);
  CHECK(s.state == session_state::active);
  CHECK(s.path == std::vector<std::string>{"s1", "s2", "s3"});
  CHECK(c.forwarding().rules.size() == 3);
  auto sb = c.take_southbound();
  CHECK(sb.installed.size() == 3);
  CHECK(sb.removed.empty());
  c.remove_session(s.id);
  CHECK(c.forwarding().rules.empty());
  CHECK(c.take_southbound().removed.size() == 3);
  CHECK(c.sessions().at(1).state == session_state::removed);
}

TEST_CASE("controller errors") {
  controller c{detour()};
  CHECK(code_of([&] { c.create_session("h1", "h9", flow_class::bulk); })
        == errc::unknown_host);
  CHECK(c.sessions().empty());
  auto t = detour();
  REQUIRE(t.links[0].b == "s2");
  t.links.erase(t.links.begin());
  controller cut{t};
  CHECK(code_of([&] { cut.create_session("h1", "h3", flow_class::bulk); })
        == errc::no_path);
  REQUIRE(cut.sessions().size() == 1);
  CHECK(cut.sessions().begin()->second.reason == "no-path");
  CHECK(cut.escalations().size() == 1);
}

TEST_CASE("two sessions between the same hosts get distinct ids") {
  controller c{detour()};
  auto a = c.create_session("h1", "h3", flow_class::interactive).id;
  auto b = c.create_session("h1", "h3", flow_class::interactive).id;
  CHECK(a != b);
  CHECK(c.forwarding().rules.size() == 6);
}

TEST_CASE("link failure reroutes only affected sessions") {
  controller c{detour()};
  auto through = c.create_session("h1", "h3", flow_class::interactive).id;
  auto aside = c.create_session("h1", "h5", flow_class::interactive).id;
  auto before = c.sessions().at(aside);
  c.take_southbound();
  auto touched = c.on_link_down("s3", "s2");
  CHECK(touched == std::vector<std::uint64_t>{through});
  CHECK(c.sessions().at(through).path
        == std::vector<std::string>{"s1", "s2", "s4", "s3"});
  CHECK(c.sessions().at(aside) == before);
  auto sb = c.take_southbound();
  CHECK(sb.removed.size() == 3);
  CHECK(sb.installed.size() == 4);
}

TEST_CASE("bridge failure removes the session and escalates") {
  controller c{detour()};
  auto id = c.create_session("h1", "h5", flow_class::interactive).id;
  c.on_link_down("s1", "s5");
  auto& s = c.sessions().at(id);
  CHECK(s.state == session_state::removed);
  CHECK(s.reason == "unroutable");
  CHECK(c.forwarding().rules.empty());
  REQUIRE(c.escalations().size() == 1);
  CHECK(c.escalations()[0]["issue"] == "unroutable");
}

TEST_CASE("update keeps the session id") {
  controller c{detour()};
  auto id = c.create_session("h1", "h3", flow_class::interactive).id;
  auto& s = c.update_session(id, flow_class::bulk);
  CHECK(s.id == id);
  CHECK(s.cls == flow_class::bulk);
  CHECK(s.state == session_state::active);
  CHECK(c.forwarding().rules.size() == 3);
}

TEST_CASE("packet-in opens one session per pair") {
  controller c{detour()};
  netsim::packet_in ev{"s1", "h1", "h3", 0, 10, "Interactive", 5};
  c.on_packet_in(ev);
  c.on_packet_in(ev);
  CHECK(c.sessions().size() == 1);
  c.prepare({"h1", "h3", 0, 10, "Interactive", 5});
  CHECK(c.sessions().size() == 1);
  c.prepare({"h3", "h1", 0, 100, "Interactive", 5});
  CHECK(c.sessions().at(2).cls == flow_class::bulk);
}

TEST_CASE("rule cap policy blocks installs") {
  controller_config cfg;
  cfg.policies.push_back({"cap1", gana_level::network, {}, {}, 1});
  controller c{detour(), cfg};
  c.create_session("h1", "h3", flow_class::interactive);
  auto& s = c.create_session("h1", "h3", flow_class::interactive);
  CHECK(s.state == session_state::removed);
  CHECK(s.reason == "policy");
  CHECK(c.forwarding().rules.size() == 3);
}

TEST_CASE("forwarding_plan orders removals first") {
  forwarding_state fwd;
  auto installed = fwd.assign_ids(rules_for_path({{"A", "B"}, 1}, "hA", "hB"));
  fwd.apply({}, installed);
  auto next = fwd.assign_ids(rules_for_path({{"A", "C"}, 1}, "hA", "hC"));
  auto p = forwarding_plan(fwd, {1, 2, 99}, next, [](const std::string& sw) {
    return std::optional{agent_id::of(function_kind::switch_adapter,
                                      sw == "A" ? 0u : 1u)};
  });
  REQUIRE(p.steps.size() == 4);
  CHECK(p.steps[0].action == "remove_rule");
  CHECK(p.steps[1].action == "remove_rule");
  CHECK(p.steps[2].action == "install_rule");
  CHECK(std::get<switch_ref>(p.steps[2].target).id == "A");
  CHECK(p.steps[2].params["rule"]["rule_id"] == 3);
  CHECK(p.steps[0].params.contains("via"));
  CHECK(forwarding_plan(fwd, {}, {}).empty());

  fwd.apply({1, 2}, next);
  CHECK(fwd.tables() == datum{{"A", {3}}, {"C", {4}}});
  auto back = forwarding_state::from(fwd.rules_datum(), fwd.next_rule_id);
  CHECK(back.rules == fwd.rules);
}

TEST_CASE("session datum round-trip") {
  session s{7, "h1", "h2", flow_class::realtime, session_state::active, "",
            {"s1", "s2"}, {4, 5}};
  CHECK(session_from(to_datum(s)) == s);
}
