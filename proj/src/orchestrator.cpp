#include "agentnet/orchestrator.hpp"

#include <algorithm>

#include "agentnet/agents.hpp"
#include "agentnet/error.hpp"

namespace agentnet::orchestration {

std::vector<function_kind> dependencies(function_kind kind) {
  switch (kind) {
    case function_kind::routing: return {function_kind::topology};
    case function_kind::forwarding: return {function_kind::routing};
    case function_kind::session: return {function_kind::forwarding};
    default: return {};
  }
}

chain_spec compose_chain(const std::set<function_kind>& requested) {
  std::set<function_kind> closure;
  std::vector<function_kind> todo(requested.begin(), requested.end());
  while (!todo.empty()) {
    auto k = todo.back();
    todo.pop_back();
    if (!closure.insert(k).second)
      continue;
    for (auto d : dependencies(k))
      todo.push_back(d);
  }
  chain_spec chain;
  std::set<function_kind> placed;
  while (placed.size() < closure.size()) {
    for (auto k : closure) {
      if (placed.count(k))
        continue;
      auto deps = dependencies(k);
      if (std::all_of(deps.begin(), deps.end(),
                      [&](auto d) { return placed.count(d) > 0; })) {
        chain.kinds.push_back(k);
        chain.instances[k] = 1;
        placed.insert(k);
        break;
      }
    }
  }
  return chain;
}

chain_spec compose_chain(const std::vector<std::string>& requested) {
  std::set<function_kind> kinds;
  for (auto& name : requested) {
    auto k = parse_kind(name);
    if (!k)
      throw error{errc::unknown_kind, name};
    kinds.insert(*k);
  }
  return compose_chain(kinds);
}

std::set<function_kind> recompose(const std::set<function_kind>& requested,
                                  const std::set<function_kind>& add,
                                  const std::set<function_kind>& remove) {
  auto next = requested;
  next.insert(add.begin(), add.end());
  for (auto k : remove)
    next.erase(k);
  for (auto k : compose_chain(next).kinds)
    if (remove.count(k))
      throw error{errc::dependency_violation,
                  std::string{to_string(k)} + " is still required"};
  return next;
}

demand compute_node::free() const {
  demand d{cpu, mem};
  for (auto& [id, h] : hosted) {
    d.cpu -= h.cpu;
    d.mem -= h.mem;
  }
  return d;
}

std::vector<agent_id> chain_agents(const chain_spec& chain) {
  std::vector<agent_id> out;
  for (auto k : chain.kinds) {
    auto n = chain.instances.count(k) ? chain.instances.at(k) : 1;
    for (int i = 0; i < n; ++i)
      out.push_back(agent_id::of(k, static_cast<std::uint32_t>(i)));
  }
  return out;
}

namespace {

demand demand_of(const std::map<function_kind, demand>& demands,
                 function_kind k) {
  auto i = demands.find(k);
  return i == demands.end() ? demand{} : i->second;
}

} // namespace

placement_plan place(const std::vector<agent_id>& agents,
                     const std::vector<compute_node>& nodes,
                     const std::map<function_kind, demand>& demands) {
  if (nodes.empty() && !agents.empty())
    throw error{errc::insufficient_capacity, "no compute nodes"};
  auto order = agents;
  std::stable_sort(order.begin(), order.end(), [&](auto& x, auto& y) {
    return demand_of(demands, x.kind).cpu > demand_of(demands, y.kind).cpu;
  });
  std::vector<demand> free;
  for (auto& n : nodes)
    free.push_back(n.free());
  placement_plan plan;
  for (auto& a : order) {
    auto d = demand_of(demands, a.kind);
    bool placed = false;
    for (std::size_t i = 0; i < nodes.size() && !placed; ++i) {
      if (free[i].cpu >= d.cpu && free[i].mem >= d.mem) {
        free[i].cpu -= d.cpu;
        free[i].mem -= d.mem;
        plan[a] = nodes[i].id;
        placed = true;
      }
    }
    if (!placed)
      throw error{errc::insufficient_capacity, "no node fits " + to_string(a)};
  }
  return plan;
}

placement_plan place(const chain_spec& chain,
                     const std::vector<compute_node>& nodes,
                     const std::map<function_kind, demand>& demands) {
  return place(chain_agents(chain), nodes, demands);
}

bool feasible(const placement_plan& plan, const std::vector<compute_node>& nodes,
              const std::map<function_kind, demand>& demands) {
  for (auto& n : nodes) {
    auto f = n.free();
    for (auto& [a, node] : plan) {
      if (node != n.id)
        continue;
      auto d = demand_of(demands, a.kind);
      f.cpu -= d.cpu;
      f.mem -= d.mem;
    }
    if (f.cpu < 0 || f.mem < 0)
      return false;
  }
  for (auto& [a, node] : plan)
    if (std::none_of(nodes.begin(), nodes.end(),
                     [&](auto& n) { return n.id == node; }))
      return false;
  return true;
}

datum to_datum(const chain_spec& chain) {
  datum kinds = datum::array();
  datum inst = datum::object();
  for (auto k : chain.kinds) {
    kinds.push_back(std::string{to_string(k)});
    inst[std::string{to_string(k)}] = chain.instances.at(k);
  }
  return datum{{"kinds", kinds}, {"instances", inst}};
}

datum initial_facts(function_kind kind, const datum& topology,
                    const std::string& sw) {
  switch (kind) {
    case function_kind::topology:
    case function_kind::routing:
    case function_kind::qos:
    case function_kind::forwarding:
      return datum{{"topology", topology}};
    case function_kind::switch_adapter:
      return datum{{"switch", sw},
                   {"topology", {{"switches", {sw}},
                                 {"hosts", datum::object()},
                                 {"links", datum::array()}}}};
    default: return datum::object();
  }
}

// -- the orchestrator agent ---------------------------------------------------

namespace {

std::string op_of(const datum& body) {
  return body.is_object() ? body.value("op", std::string{}) : std::string{};
}

std::string topic_of(const message& m) {
  auto t = std::get_if<topic>(&m.dst);
  return t ? t->name : std::string{};
}

std::map<function_kind, demand> demands_of(const facts_store& facts) {
  std::map<function_kind, demand> out;
  auto raw = facts.value_or("demands", datum::object());
  for (auto& [k, d] : raw.items())
    if (auto kind = parse_kind(k))
      out[*kind] = {d.value("cpu", std::int64_t{0}),
                    d.value("mem", std::int64_t{0})};
  return out;
}

/// Inventory with what the managed agents currently occupy.
std::vector<compute_node> nodes_of(const facts_store& facts) {
  auto demands = demands_of(facts);
  std::vector<compute_node> nodes;
  for (auto& n : facts.value_or("nodes", datum::array()))
    nodes.push_back({n.at("node"), n.value("cpu", std::int64_t{0}),
                     n.value("mem", std::int64_t{0}), {}});
  auto managed = facts.value_or("managed", datum::object());
  for (auto& [name, m] : managed.items()) {
    auto node = m.value("node", std::string{});
    auto id = agent_id_from(name);
    for (auto& n : nodes)
      if (n.id == node)
        n.hosted[id] = demand_of(demands, id.kind);
  }
  return nodes;
}

std::set<function_kind> kinds_from(const datum& names) {
  std::set<function_kind> out;
  for (auto& n : names) {
    auto k = parse_kind(n.get<std::string>());
    if (!k)
      throw error{errc::unknown_kind, n.get<std::string>()};
    out.insert(*k);
  }
  return out;
}

datum names_of(const std::set<function_kind>& kinds) {
  datum out = datum::array();
  for (auto k : kinds)
    out.push_back(std::string{to_string(k)});
  return out;
}

std::uint32_t next_instance(datum& counters, function_kind k) {
  auto key = std::string{to_string(k)};
  auto n = counters.value(key, std::uint32_t{0});
  counters[key] = n + 1;
  return n;
}

/// Places `agents` and appends spawn entries; throws insufficient_capacity.
void plan_spawns(const facts_store& facts, std::vector<compute_node> nodes,
                 const std::vector<agent_id>& agents, datum& spawns) {
  auto plan = place(agents, nodes, demands_of(facts));
  for (auto& a : agents)
    spawns.push_back({{"agent", to_string(a)}, {"node", plan.at(a)}});
}

cognition_outcome deploy(const facts_store& facts, const datum& body) {
  auto topo = facts.value_or("topology", datum::object());
  auto counters = facts.value_or("next_instance", datum::object());
  auto managed = facts.value_or("managed", datum::object());
  for (auto& name : body.value("adopt", datum::array())) {
    auto id = agent_id_from(name);
    auto key = std::string{to_string(id.kind)};
    if (counters.value(key, std::uint32_t{0}) <= id.instance)
      counters[key] = id.instance + 1;
  }
  datum spawns = datum::array();
  auto infra = [&](function_kind k, const std::string& sw) {
    auto id = agent_id::of(k, next_instance(counters, k));
    spawns.push_back({{"agent", to_string(id)}, {"node", ""}, {"switch", sw}});
  };
  if (topo.contains("switches"))
    for (auto& sw : topo.at("switches"))
      infra(function_kind::switch_adapter, sw);
  infra(function_kind::event_distribution, "");
  auto requested = kinds_from(body.value("requested", datum::array()));
  auto chain = compose_chain(requested);
  std::vector<agent_id> agents;
  for (auto k : chain.kinds)
    agents.push_back(agent_id::of(k, next_instance(counters, k)));
  try {
    plan_spawns(facts, nodes_of(facts), agents, spawns);
  } catch (const error& ex) {
    return {datum{{"reply", {{"error", std::string{to_string(ex.code())}}}}},
            1.0};
  }
  return {datum{{"spawn", spawns},
                {"adopt", body.value("adopt", datum::array())},
                {"next_instance", counters},
                {"requested", names_of(requested)},
                {"reply", {{"op", "deployed"}, {"chain", to_datum(chain)}}}},
          1.0};
}

cognition_outcome recompose_cog(const facts_store& facts, const datum& body) {
  auto requested = kinds_from(facts.value_or("requested", datum::array()));
  std::set<function_kind> next;
  try {
    next = recompose(requested, kinds_from(body.value("add", datum::array())),
                     kinds_from(body.value("remove", datum::array())));
  } catch (const error& ex) {
    return {datum{{"reply", {{"error", std::string{to_string(ex.code())}}}}},
            1.0};
  }
  auto before = compose_chain(requested);
  auto after = compose_chain(next);
  auto in = [](const chain_spec& c, function_kind k) {
    return std::find(c.kinds.begin(), c.kinds.end(), k) != c.kinds.end();
  };
  auto managed = facts.value_or("managed", datum::object());
  datum despawns = datum::array();
  for (auto k = before.kinds.rbegin(); k != before.kinds.rend(); ++k) {
    if (in(after, *k))
      continue;
    for (auto& [name, m] : managed.items())
      if (agent_id_from(name).kind == *k)
        despawns.push_back(name);
  }
  auto nodes = nodes_of(facts);
  for (auto& name : despawns)
    for (auto& n : nodes)
      n.hosted.erase(agent_id_from(name));
  auto counters = facts.value_or("next_instance", datum::object());
  std::vector<agent_id> agents;
  for (auto k : after.kinds)
    if (!in(before, k))
      agents.push_back(agent_id::of(k, next_instance(counters, k)));
  datum spawns = datum::array();
  try {
    plan_spawns(facts, nodes, agents, spawns);
  } catch (const error& ex) {
    return {datum{{"reply", {{"error", std::string{to_string(ex.code())}}}}},
            1.0};
  }
  return {datum{{"despawn", despawns},
                {"spawn", spawns},
                {"next_instance", counters},
                {"requested", names_of(next)},
                {"reply", {{"op", "recomposed"}, {"chain", to_datum(after)}}}},
          1.0};
}

cognition_outcome check_heartbeats(const facts_store& facts, tick now) {
  auto interval = facts.value_or("heartbeat_interval", datum(10)).get<tick>();
  auto last = facts.value_or("last_hb", datum::object());
  auto managed = facts.value_or("managed", datum::object());
  auto counters = facts.value_or("next_instance", datum::object());
  auto nodes = nodes_of(facts);
  datum recovered = datum::array();
  datum failed = datum::array();
  for (auto& [name, m] : managed.items()) {
    if (m.value("lost", false))
      continue;
    auto seen = last.value(name, m.value("spawned_at", tick{0}));
    if (now - seen <= 3 * interval)
      continue;
    auto old = agent_id_from(name);
    auto fresh = agent_id::of(old.kind, next_instance(counters, old.kind));
    auto node = m.value("node", std::string{});
    if (!node.empty()) {
      try {
        auto plan = place({fresh}, nodes, demands_of(facts));
        node = plan.at(fresh);
        for (auto& n : nodes)
          if (n.id == node)
            n.hosted[fresh] = demand_of(demands_of(facts), fresh.kind);
      } catch (const error& ex) {
        failed.push_back({{"agent", name},
                          {"error", std::string{to_string(ex.code())}}});
        continue;
      }
    }
    for (auto& n : nodes)
      n.hosted.erase(old);
    recovered.push_back({{"agent", to_string(fresh)},
                         {"node", node},
                         {"replaces", name},
                         {"switch", m.value("switch", std::string{})}});
  }
  if (recovered.empty() && failed.empty())
    return {datum{}, 1.0};
  return {datum{{"spawn", recovered},
                {"lost", failed},
                {"next_instance", counters}},
          1.0};
}

cognition_outcome orchestrate(const facts_store& facts, const message& input,
                              const datum& body) {
  auto op = op_of(body);
  auto to = std::get_if<agent_id>(&input.dst);
  if (op == "tick" && to && *to == input.src)
    return check_heartbeats(facts, body.at("now").get<tick>());
  if (input.kind != message_kind::request)
    return {datum{}, 1.0};
  if (op == "deploy")
    return deploy(facts, body);
  if (op == "recompose")
    return recompose_cog(facts, body);
  if (op == "escalation")
    return {datum{{"reply", {{"op", "ack"}}}}, 1.0};
  return {datum{{"unexpected", op}}, 0.0};
}

void orchestrator_absorb(facts_store& facts, const message& input,
                         const datum& body, tick now) {
  auto t = topic_of(input);
  if (t == "control.heartbeat") {
    auto last = facts.value_or("last_hb", datum::object());
    last[body.at("agent").get<std::string>()] = input.sim_time;
    facts.write("last_hb", last, now);
  } else if (t == "kp.digest") {
    facts.write("kp." + body.at("agent").get<std::string>(), body, now);
  } else if (op_of(body) == "escalation"
             && input.kind == message_kind::request) {
    auto incidents = facts.value_or("incidents", datum::array());
    incidents.push_back({{"from", body.at("from")}, {"issue", body.at("issue")}});
    facts.write("incidents", incidents, now);
  }
}

plan orchestrator_plan(const cognition_outcome& out, const facts_store& facts,
                       const message& input, const datum&) {
  plan p;
  auto& d = out.decision;
  if (!d.is_object())
    return p;
  auto self = agent_id_from(facts.value_or("self", datum{}));
  auto managed = facts.value_or("managed", datum::object());
  auto last = facts.value_or("last_hb", datum::object());
  auto now = input.sim_time + 1;
  if (op_of(decode_body(input.payload)) == "tick")
    now = decode_body(input.payload).at("now").get<tick>();
  for (auto& name : d.value("despawn", datum::array())) {
    p.steps.push_back({"despawn", agent_id_from(name), datum::object()});
    managed.erase(name.get<std::string>());
    last.erase(name.get<std::string>());
  }
  for (auto& s : d.value("spawn", datum::array())) {
    auto node = s.value("node", std::string{});
    plan_target target = self;
    if (!node.empty())
      target = node_ref{node};
    p.steps.push_back({"spawn", target, s});
    datum entry{{"node", node}, {"spawned_at", now}};
    if (!s.value("switch", std::string{}).empty())
      entry["switch"] = s.at("switch");
    managed[s.at("agent").get<std::string>()] = entry;
    last[s.at("agent").get<std::string>()] = now;
    if (s.contains("replaces")) {
      managed.erase(s.at("replaces").get<std::string>());
      last.erase(s.at("replaces").get<std::string>());
    }
  }
  for (auto& name : d.value("adopt", datum::array())) {
    managed[name.get<std::string>()] = {{"node", ""}, {"spawned_at", now}};
    last[name.get<std::string>()] = now;
  }
  for (auto& l : d.value("lost", datum::array())) {
    managed[l.at("agent").get<std::string>()]["lost"] = true;
    p.steps.push_back({"publish", topic{"events.orchestration"},
                       datum{{"body", {{"op", "recovery-failed"},
                                       {"agent", l.at("agent")},
                                       {"error", l.at("error")}}}}});
  }
  if (d.contains("spawn") || d.contains("despawn") || d.contains("lost")
      || d.contains("adopt")) {
    p.steps.push_back({"update_facts", self,
                       datum{{"key", "managed"}, {"value", managed}}});
    p.steps.push_back({"update_facts", self,
                       datum{{"key", "last_hb"}, {"value", last}}});
  }
  if (d.contains("next_instance"))
    p.steps.push_back({"update_facts", self,
                       datum{{"key", "next_instance"},
                             {"value", d.at("next_instance")}}});
  if (d.contains("requested"))
    p.steps.push_back({"update_facts", self,
                       datum{{"key", "requested"},
                             {"value", d.at("requested")}}});
  if (d.contains("reply") && input.src != self)
    p.steps.push_back({"respond", input.src, datum{{"body", d.at("reply")}}});
  return p;
}

std::vector<message> spawn_effect(runtime& rt, const agent_id& actor,
                                  const plan_step& step) {
  auto& s = step.params;
  auto id = agent_id_from(s.at("agent"));
  auto& orch = rt.facts(actor);
  agent_spec spec;
  if (s.contains("replaces")) {
    auto old = agent_id_from(s.at("replaces"));
    spec = rt.spec_of(old);
    spec.id = id;
    if (spec.endpoint.starts_with("agent://"))
      spec.endpoint.clear();
    spec.capabilities.clear();
    if (auto digest = orch.get("kp." + to_string(old)))
      spec.initial_facts = digest->at("facts");
    spec.node = s.value("node", std::string{});
    rt.spawn_agent(spec);
    rt.deregister_direct(old);
    rt.redirect(old, id);
    return {};
  }
  spec = agents::default_spec(id);
  auto sw = s.value("switch", std::string{});
  spec.initial_facts = initial_facts(id.kind,
                                     orch.value_or("topology", datum::object()),
                                     sw);
  if (id.kind == function_kind::switch_adapter)
    spec.endpoint = "switch://" + sw;
  spec.node = s.value("node", std::string{});
  rt.spawn_agent(spec);
  return {};
}

std::vector<message> despawn_effect(runtime& rt, const agent_id&,
                                    const plan_step& step) {
  auto id = std::get<agent_id>(step.target);
  if (rt.is_live(id))
    rt.stop_agent(id);
  return {};
}

} // namespace

void install(runtime& rt) {
  rt.cognitions().add("orchestration.ffd", orchestrate);
  rt.set_behavior(function_kind::orchestration,
                  {orchestrator_absorb, orchestrator_plan});
  rt.set_effect("spawn", spawn_effect);
  rt.set_effect("despawn", despawn_effect);
}

agent_spec orchestrator_spec(const orchestrator_config& cfg,
                             const runtime_options& opts) {
  auto spec = agents::default_spec(agent_id::of(function_kind::orchestration, 0));
  datum nodes = datum::array();
  for (auto& n : cfg.nodes)
    nodes.push_back({{"node", n.id}, {"cpu", n.cpu}, {"mem", n.mem}});
  datum demands = datum::object();
  for (auto& [k, d] : cfg.demands)
    demands[std::string{to_string(k)}] = {{"cpu", d.cpu}, {"mem", d.mem}};
  spec.initial_facts = datum{{"nodes", nodes},
                             {"demands", demands},
                             {"heartbeat_interval", opts.heartbeat_interval},
                             {"topology", cfg.topology},
                             {"managed", datum::object()},
                             {"requested", datum::array()}};
  return spec;
}

} // namespace agentnet::orchestration
