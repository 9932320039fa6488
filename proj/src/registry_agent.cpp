// Pipeline halves for the registry agent. Its lease table lives in facts so a
// replacement restored from a digest carries the registrations over.

#include "agentnet/error.hpp"
#include "agentnet/runtime.hpp"

namespace agentnet::detail {

namespace {

service_registry table_of(const facts_store& facts) {
  if (auto leases = facts.get("leases"))
    return service_registry::from_datum(*leases);
  return {};
}

datum members_of(const service_registry& table, tick now) {
  datum members = datum::array();
  for (auto& d : table.live(now))
    members.push_back(to_datum(d));
  return members;
}

void store(facts_store& facts, const service_registry& table, tick now,
           std::uint64_t cause) {
  facts.write("leases", table.to_datum(), now);
  auto members = members_of(table, now);
  if (facts.value_or("members", datum{}) != members) {
    facts.write("members", members, now);
    facts.write("peers", members, now);
    facts.write("changed_by", cause, now);
  }
}

void absorb(facts_store& facts, const message& input, const datum& body,
            tick now) {
  auto op = body.value("op", std::string{});
  auto table = table_of(facts);
  auto known = facts.value_or("descriptors", datum::object());
  if (op == "heartbeat") {
    auto who = body.at("agent").get<std::string>();
    try {
      table.heartbeat(agent_id_from(who), now);
    } catch (const error& ex) {
      if (ex.code() != errc::no_such_lease || !known.contains(who))
        return;
      table.register_service(service_descriptor_from(known.at(who)), now);
    }
    store(facts, table, now, input.msg_id);
  } else if (op == "register" && input.kind == message_kind::request) {
    auto desc = service_descriptor_from(body.at("descriptor"));
    table.register_service(desc, now);
    known[to_string(desc.agent)] = to_datum(desc);
    facts.write("descriptors", known, now);
    store(facts, table, now, input.msg_id);
  } else if (op == "deregister" && input.kind == message_kind::request) {
    auto who = body.at("agent").get<std::string>();
    if (!table.find(agent_id_from(who)))
      return;
    table.deregister(agent_id_from(who));
    known.erase(who);
    facts.write("descriptors", known, now);
    store(facts, table, now, input.msg_id);
  }
}

cognition_outcome nrf(const facts_store& facts, const message& input,
                      const datum& body) {
  auto op = body.value("op", std::string{});
  datum decision = datum::object();
  bool changed = facts.value_or("changed_by", datum{}) == input.msg_id;
  if (changed)
    decision["announce"] = facts.value_or("members", datum::array());
  if (input.kind != message_kind::request)
    return {decision, 1.0};
  auto table = table_of(facts);
  if (op == "register") {
    decision["reply"] = {{"ok", true}};
  } else if (op == "deregister") {
    auto who = agent_id_from(body.at("agent"));
    decision["reply"] = {{"ok", changed || !table.find(who)}};
  } else if (op == "discover") {
    auto kind = parse_kind(body.at("kind").get<std::string>());
    if (!kind)
      return {datum{{"unknown_kind", body.at("kind")}}, 0.0};
    std::optional<gana_level> level;
    if (body.contains("level"))
      level = parse_level(body.at("level").get<std::string>());
    datum found = datum::array();
    for (auto& d : table.discover(*kind, level, input.sim_time + 1))
      found.push_back(to_datum(d));
    decision["reply"] = {{"services", found}};
  } else {
    return {datum{{"unknown_op", op}}, 0.0};
  }
  return {decision, 1.0};
}

plan planner(const cognition_outcome& outcome, const facts_store&,
             const message& input, const datum&) {
  plan p;
  if (outcome.decision.contains("announce"))
    p.steps.push_back(
      {"publish", topic{"control.registry"},
       datum{{"body", {{"op", "membership"},
                       {"members", outcome.decision.at("announce")}}}}});
  if (outcome.decision.contains("reply"))
    p.steps.push_back(
      {"respond", input.src, datum{{"body", outcome.decision.at("reply")}}});
  return p;
}

} // namespace

void install_registry_behavior(runtime& rt) {
  rt.cognitions().add("registry.nrf", nrf);
  rt.set_behavior(function_kind::registry, behavior{absorb, planner});
}

} // namespace agentnet::detail
