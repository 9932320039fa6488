#include <doctest.h>

#include "agentnet/agents.hpp"
#include "agentnet/error.hpp"
#include "agentnet/gana.hpp"
#include "agentnet/runtime.hpp"
#include "generators.hpp"

using namespace agentnet;

namespace {

struct fixture {
  runtime rt;

  fixture() {
    agents::install(rt);
    spawn(function_kind::registry, 0);
  }

  agent_id spawn(function_kind k, std::uint32_t i) {
    return rt.spawn_agent(agents::default_spec(agent_id::of(k, i)));
  }

  void settle() {
    for (int i = 0; i < 5; ++i) {
      rt.end_tick();
      rt.deliver_due();
    }
  }
};

policy deny_all(gana_level issuer, std::set<function_kind> scope) {
  return policy{"deny-all", issuer, std::move(scope),
                {{policy_effect::deny, "*", target_class::any}}, std::nullopt};
}

errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return errc::file_error;
}

} // namespace

TEST_CASE("node-level policy reaches every routing agent") {
  fixture f;
  f.spawn(function_kind::routing, 0);
  f.spawn(function_kind::routing, 3);
  f.spawn(function_kind::qos, 0);
  f.settle();
  auto expected = f.rt.discover(function_kind::routing, std::nullopt).size();
  auto p = deny_all(gana_level::node, {function_kind::routing});
  CHECK(push_policy(f.rt, p) == expected);
  f.settle();
  for (auto& d : f.rt.discover(function_kind::routing, std::nullopt)) {
    auto held = f.rt.policies(d.agent);
    REQUIRE(held.size() == 1);
    CHECK(held[0].policy_id == "deny-all");
  }
  CHECK(f.rt.policies(agent_id::of(function_kind::qos, 0)).empty());
}

TEST_CASE("policies only flow downward") {
  fixture f;
  f.spawn(function_kind::fault, 0);
  CHECK(code_of([&] {
          push_policy(f.rt, deny_all(gana_level::function, {function_kind::fault}));
        })
        == errc::invalid_direction);
  CHECK(code_of([&] {
          push_policy(f.rt, deny_all(gana_level::node, {function_kind::fault}));
        })
        == errc::invalid_direction);
  CHECK(push_policy(f.rt, deny_all(gana_level::network, {})) == 0);
}

TEST_CASE("escalation goes one level up to the preferred handler") {
  fixture f;
  auto r = f.spawn(function_kind::routing, 0);
  f.spawn(function_kind::fault, 2);
  f.spawn(function_kind::fault, 1);
  f.spawn(function_kind::security, 0);
  auto receipt = escalate(f.rt, {r, datum{{"issue", "no-path"}}, 0});
  CHECK(receipt.handler == agent_id::of(function_kind::fault, 1));
  CHECK(static_cast<int>(receipt.handler.level)
        == static_cast<int>(r.level) + 1);

  auto net = agent_id::of(function_kind::registry, 0);
  CHECK(code_of([&] { escalate(f.rt, {net, datum{}, 0}); })
        == errc::no_upper_agent);
}

TEST_CASE("escalation without an upper agent") {
  fixture f;
  auto r = f.spawn(function_kind::routing, 0);
  CHECK(code_of([&] { escalate(f.rt, {r, datum{}, 0}); })
        == errc::no_upper_agent);
}

TEST_CASE("select_upper tie-breaks and levels") {
  auto r = agent_id::of(function_kind::routing, 0);
  auto sec = agent_id::of(function_kind::security, 0);
  std::vector<agent_id> only_sec{sec, agent_id::of(function_kind::security, 4)};
  CHECK(select_upper(r, only_sec) == sec);
  auto orch = agent_id::of(function_kind::orchestration, 3);
  std::vector<agent_id> net{agent_id::of(function_kind::registry, 0), orch};
  CHECK(select_upper(sec, net) == orch);
  CHECK_FALSE(select_upper(orch, net));
  CHECK_FALSE(select_upper(r, net));
}

TEST_CASE("aggregate_view examples") {
  CHECK(aggregate_view({}).nodes.empty());
  knowledge_view a;
  a.nodes["n1"]["topology"] = {datum{{"x", 1}}, 5};
  knowledge_view b;
  b.nodes["n2"]["stats"] = {datum{{"y", 2}}, 3};
  std::vector<knowledge_view> two{a, b};
  auto merged = aggregate_view(two);
  CHECK(merged.nodes.size() == 2);

  knowledge_view later;
  later.nodes["n1"]["topology"] = {datum{{"x", 9}}, 9};
  std::vector<knowledge_view> conflict{later, a};
  CHECK(aggregate_view(conflict).nodes["n1"]["topology"].value
        == datum{{"x", 9}});
}

TEST_CASE("aggregate_view is idempotent and order-insensitive") {
  testgen::rng_t rng{8};
  for (int t = 0; t < 200; ++t) {
    std::vector<knowledge_view> views(
      static_cast<std::size_t>(testgen::uniform(rng, 0, 5)));
    for (auto& v : views) {
      v.merged_at = testgen::uniform(rng, 0, 20);
      for (int k = 0; k < 6; ++k)
        v.nodes["n" + std::to_string(testgen::uniform(rng, 0, 3))]
               ["k" + std::to_string(testgen::uniform(rng, 0, 3))] = {
          datum(testgen::uniform(rng, 0, 9)), testgen::uniform(rng, 0, 5)};
    }
    auto merged = aggregate_view(views);
    std::vector<knowledge_view> self{merged, merged};
    CHECK(aggregate_view(self) == merged);
    auto shuffled = views;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(aggregate_view(shuffled) == merged);
    CHECK(knowledge_view_from(to_datum(merged)) == merged);
    for (auto& v : views)
      for (auto& [node, entries] : v.nodes)
        for (auto& [key, e] : entries)
          CHECK(merged.nodes[node][key].updated_at >= e.updated_at);
  }
}
