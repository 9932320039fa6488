#include "agentnet/system.hpp"

#include <algorithm>

#include "agentnet/agents.hpp"
#include "agentnet/error.hpp"
#include "agentnet/gana.hpp"
#include "agentnet/orchestrator.hpp"

namespace agentnet {

namespace {

std::vector<control::session> ledger_of(const runtime& rt) {
  std::vector<control::session> out;
  for (auto& id : rt.live_agents()) {
    if (id.kind != function_kind::session)
      continue;
    auto sessions = rt.facts(id).value_or("sessions", datum::object());
    for (auto& [key, s] : sessions.items())
      out.push_back(control::session_from(s));
    break;
  }
  return out;
}

} // namespace

agents_run run_agents(const run_config& cfg, const agents_options& ao) {
  agents_run result;
  auto note = [&](datum line) { result.log.push_back(line.dump()); };

  runtime_options ro;
  ro.strategy = cfg.strategy;
  ro.heartbeat_interval = cfg.heartbeat_interval;
  ro.lease_ttl = 3 * cfg.heartbeat_interval + 1;
  ro.profiles = cfg.profiles;
  ro.duplicate = ao.duplicate;
  ro.drop = ao.drop;
  ro.keep_stage_log = ao.keep_stage_log;
  runtime rt{ro};
  agents::install(rt, {cfg.classifier, cfg.qos});
  orchestration::install(rt);

  auto sim_opts = cfg.sim;
  sim_opts.apply_scenario_failures = false;
  netsim::simulator sim{cfg.topo, cfg.scen, sim_opts};
  rt.set_effect("southbound", [&sim](runtime&, const agent_id&,
                                     const plan_step& step) {
    auto& p = step.params;
    if (p.at("op") == "install_rule")
      sim.install_rule(netsim::flow_rule_from(p.at("rule")));
    else
      sim.remove_rule(p.at("rule_id").get<std::uint64_t>());
    return std::vector<message>{};
  });

  auto chain = orchestration::compose_chain(cfg.chain);
  note({{"tick", 0},
        {"event", "start"},
        {"mode", "agents"},
        {"requested", cfg.chain},
        {"chain", orchestration::to_datum(chain)}});

  auto registry = rt.spawn_agent(
    agents::default_spec(agent_id::of(function_kind::registry, 0)));
  orchestration::orchestrator_config oc{cfg.nodes, cfg.demands,
                                        cfg.topo.to_datum()};
  auto orch = rt.spawn_agent(orchestration::orchestrator_spec(oc, ro));
  rt.inject(rt.make(orch, orch, message_kind::request,
                    datum{{"op", "deploy"},
                          {"requested", cfg.chain},
                          {"adopt", {to_string(registry)}}}));
  rt.deliver_due();
  datum live = datum::array();
  for (auto& id : rt.live_agents())
    live.push_back(to_string(id));
  note({{"tick", 0}, {"event", "deployed"}, {"agents", live}});
  for (auto& p : cfg.policies) {
    auto n = push_policy(rt, p);
    note({{"tick", 0},
          {"event", "policy"},
          {"policy_id", p.policy_id},
          {"recipients", n}});
  }
  if (cfg.proactive) {
    datum flows = datum::array();
    for (auto& f : cfg.scen.flows)
      flows.push_back({{"src", f.src},
                       {"dst", f.dst},
                       {"size", f.size},
                       {"interval", f.interval},
                       {"class", f.cls},
                       {"start_tick", f.start_tick}});
    rt.send(rt.make(orch, topic{"events.schedule"}, message_kind::event,
                    datum{{"op", "schedule"}, {"flows", flows}}));
  }

  std::map<std::string, std::uint32_t> adapter_index;
  for (std::size_t i = 0; i < cfg.topo.switches.size(); ++i)
    adapter_index[cfg.topo.switches[i]] = static_cast<std::uint32_t>(i);
  auto adapter = [&](const std::string& sw) {
    return agent_id::of(function_kind::switch_adapter, adapter_index.at(sw));
  };

  auto failures = cfg.scen.failures;
  std::stable_sort(failures.begin(), failures.end(),
                   [](auto& x, auto& y) { return x.at < y.at; });
  auto kills = ao.kills;
  std::stable_sort(kills.begin(), kills.end(),
                   [](auto& x, auto& y) { return x.at < y.at; });
  std::size_t next_failure = 0;
  std::size_t next_kill = 0;
  auto end = cfg.scen.duration_ticks;

  for (;;) {
    auto t = rt.now();
    if (rt.quiescent()) {
      while (next_failure < failures.size() && failures[next_failure].at <= t) {
        auto& f = failures[next_failure++];
        sim.fail_link(f.a, f.b, t);
        note({{"tick", t},
              {"event", "link_failure"},
              {"a", f.a},
              {"b", f.b},
              {"scheduled", f.at}});
      }
      while (next_kill < kills.size() && kills[next_kill].at <= t) {
        auto& k = kills[next_kill++];
        std::optional<agent_id> target;
        for (auto& id : rt.live_agents())
          if (id.kind == k.kind && (!k.instance || id.instance == *k.instance)) {
            target = id;
            break;
          }
        if (!target)
          continue;
        rt.kill_agent(*target);
        result.recoveries.push_back({*target, t, std::nullopt, std::nullopt});
        note({{"tick", t}, {"event", "kill"}, {"agent", to_string(*target)}});
      }
    }
    for (auto& ev : sim.step()) {
      agent_id to;
      if (auto* p = std::get_if<netsim::packet_in>(&ev.body))
        to = adapter(p->sw);
      else if (auto* d = std::get_if<netsim::link_down>(&ev.body))
        to = adapter(std::min(d->a, d->b));
      else if (auto* u = std::get_if<netsim::link_up>(&ev.body))
        to = adapter(std::min(u->a, u->b));
      else
        to = adapter(cfg.topo.switches.front());
      rt.inject(rt.make(to, to, message_kind::event,
                        datum{{"op", "sim"}, {"event", netsim::to_datum(ev)}}));
    }
    rt.deliver_due();
    for (auto& rec : result.recoveries) {
      if (rec.registered_at || rec.failed)
        continue;
      auto managed = rt.facts(orch).value_or("managed", datum::object());
      auto entry = managed.value(to_string(rec.killed), datum::object());
      if (entry.value("lost", false)) {
        rec.failed = true;
        auto dropped = rt.abandon(rec.killed);
        note({{"tick", t},
              {"event", "recovery_failed"},
              {"agent", to_string(rec.killed)},
              {"dropped", dropped}});
        continue;
      }
      auto alias = rt.alias_of(rec.killed);
      if (alias && rt.lease_of(*alias)) {
        rec.replacement = alias;
        rec.registered_at = t;
        note({{"tick", t},
              {"event", "recovered"},
              {"agent", to_string(rec.killed)},
              {"replacement", to_string(*alias)}});
      }
    }
    for (auto& [sw, rules] : sim.flow_tables())
      result.max_rules_per_switch =
        std::max(result.max_rules_per_switch, rules.size());
    rt.end_tick();
    bool recovering = std::any_of(result.recoveries.begin(),
                                  result.recoveries.end(),
                                  [](auto& r) { return !r.registered_at && !r.failed; });
    bool done = t + 1 >= end && next_failure == failures.size()
                && next_kill == kills.size() && !recovering;
    if (done && rt.quiescent())
      break;
    if (t + 1 >= end + cfg.drain_limit) {
      result.settled = false;
      note({{"tick", t}, {"event", "unsettled"}});
      break;
    }
  }
  for (auto& [sw, rules] : sim.flow_tables())
    result.max_rules_per_switch =
      std::max(result.max_rules_per_switch, rules.size());
  result.violation_events = rt.violation_count();
  result.stats = sim.stats();
  result.outcome = normalize(sim.flow_tables(), ledger_of(rt), measure(sim));
  result.outcome.stats = result.stats;
  note({{"tick", rt.now()},
        {"event", "end"},
        {"delivered", rt.delivered_count()},
        {"violations", result.violation_events}});
  for (auto& line : rt.bus_log())
    note({{"event", "bus"}, {"detail", line}});
  for (auto& rec : rt.stage_log())
    result.log.push_back(to_datum(rec).dump());
  result.stage_log = rt.stage_log();
  return result;
}

} // namespace agentnet
