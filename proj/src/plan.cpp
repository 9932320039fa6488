#include "agentnet/plan.hpp"

#include <algorithm>
#include <map>

#include "agentnet/error.hpp"
#include "agentnet/event_plane.hpp"

namespace agentnet {

namespace {

std::string_view class_name(target_class c) {
  switch (c) {
    case target_class::any: return "*";
    case target_class::agent: return "agent";
    case target_class::switch_: return "switch";
    case target_class::topic: return "topic";
    case target_class::node: return "node";
  }
  return "*";
}

target_class parse_class(const std::string& name) {
  for (auto c : {target_class::any, target_class::agent, target_class::switch_,
                 target_class::topic, target_class::node})
    if (class_name(c) == name)
      return c;
  throw error{errc::schema_error, "unknown target class " + name};
}

bool agent_known(const facts_store& facts, const agent_id& id) {
  auto name = to_string(id);
  if (auto self = facts.get("self"); self && *self == name)
    return true;
  if (auto peers = facts.get("peers"))
    for (auto& p : *peers)
      if (p.at("agent") == name)
        return true;
  if (auto managed = facts.get("managed"); managed && managed->contains(name))
    return true;
  return false;
}

bool switch_known(const facts_store& facts, const std::string& id) {
  auto topo = facts.get("topology");
  if (!topo)
    return false;
  auto& switches = topo->at("switches");
  return std::find(switches.begin(), switches.end(), id) != switches.end();
}

bool node_known(const facts_store& facts, const std::string& id) {
  if (auto nodes = facts.get("nodes"))
    for (auto& n : *nodes)
      if (n.at("node") == id)
        return true;
  return false;
}

bool target_known(const facts_store& facts, const plan_target& target) {
  return std::visit(
    [&](auto& t) -> bool {
      using T = std::decay_t<decltype(t)>;
      if constexpr (std::is_same_v<T, agent_id>)
        return agent_known(facts, t);
      else if constexpr (std::is_same_v<T, switch_ref>)
        return switch_known(facts, t.id);
      else if constexpr (std::is_same_v<T, node_ref>)
        return node_known(facts, t.id);
      else
        return valid_topic(t.name);
    },
    target);
}

// A forwarding action is consistent when the next hop is a host attached to
// the switch or a neighbor over a link the facts believe is up.
bool hop_consistent(const datum& topo, const std::string& sw,
                    const std::string& next) {
  if (auto hosts = topo.find("hosts"); hosts != topo.end()) {
    if (auto h = hosts->find(next); h != hosts->end())
      return *h == sw;
  }
  for (auto& link : topo.at("links")) {
    auto& a = link.at("a");
    auto& b = link.at("b");
    if ((a == sw && b == next) || (a == next && b == sw))
      return link.value("up", true);
  }
  return false;
}

bool rule_matches(const policy_rule& rule, const plan_step& step) {
  if (rule.action_kind != "*" && rule.action_kind != step.action)
    return false;
  return rule.target == target_class::any
         || rule.target == class_of(step.target);
}

} // namespace

target_class class_of(const plan_target& target) noexcept {
  switch (target.index()) {
    case 0: return target_class::agent;
    case 1: return target_class::switch_;
    case 2: return target_class::topic;
    default: return target_class::node;
  }
}

std::string to_string(const plan_target& target) {
  return std::visit(
    [](auto& t) -> std::string {
      using T = std::decay_t<decltype(t)>;
      if constexpr (std::is_same_v<T, agent_id>)
        return to_string(t);
      else if constexpr (std::is_same_v<T, topic>)
        return t.name;
      else
        return t.id;
    },
    target);
}

datum to_datum(const policy& p) {
  datum scope = datum::array();
  for (auto k : p.scope)
    scope.push_back(std::string{to_string(k)});
  datum rules = datum::array();
  for (auto& r : p.rules)
    rules.push_back({{"effect", r.effect == policy_effect::deny ? "deny"
                                                                 : "allow"},
                     {"action", r.action_kind},
                     {"target", std::string{class_name(r.target)}}});
  datum out{{"policy_id", p.policy_id},
            {"issuer_level", std::string{to_string(p.issuer_level)}},
            {"scope", scope},
            {"rules", rules}};
  if (p.max_rules_per_switch)
    out["max_rules_per_switch"] = *p.max_rules_per_switch;
  return out;
}

policy policy_from(const datum& value) {
  policy p;
  p.policy_id = value.at("policy_id").get<std::string>();
  auto level = parse_level(value.at("issuer_level").get<std::string>());
  if (!level)
    throw error{errc::schema_error, "bad issuer_level"};
  p.issuer_level = *level;
  for (auto& k : value.value("scope", datum::array())) {
    auto kind = parse_kind(k.get<std::string>());
    if (!kind)
      throw error{errc::unknown_kind, k.dump()};
    p.scope.insert(*kind);
  }
  for (auto& r : value.value("rules", datum::array())) {
    policy_rule rule;
    auto eff = r.value("effect", std::string{"deny"});
    if (eff != "deny" && eff != "allow")
      throw error{errc::schema_error, "bad effect " + eff};
    rule.effect = eff == "deny" ? policy_effect::deny : policy_effect::allow;
    rule.action_kind = r.value("action", std::string{"*"});
    rule.target = parse_class(r.value("target", std::string{"*"}));
    p.rules.push_back(rule);
  }
  if (value.contains("max_rules_per_switch"))
    p.max_rules_per_switch = value.at("max_rules_per_switch").get<int>();
  return p;
}

validation_report validate_plan(const plan& p, const facts_store& facts,
                                std::span<const policy> policies) {
  validation_report report;
  auto add = [&](std::string constraint, std::string detail) {
    for (auto& v : report.violations)
      if (v.constraint == constraint)
        return;
    report.violations.push_back({std::move(constraint), std::move(detail)});
  };
  if (p.empty())
    add("empty-plan", "plan has no steps");
  for (auto& key : p.requires_facts)
    if (!facts.contains(key))
      add("missing-" + key, "facts lack '" + key + "'");
  auto topo = facts.get("topology");
  for (auto& step : p.steps) {
    if (!target_known(facts, step.target))
      add("unknown-target", step.action + " -> " + to_string(step.target));
    if (auto via = step.params.find("via"); via != step.params.end()) {
      auto id = parse_agent_id(via->get<std::string>());
      if (!id || !agent_known(facts, *id))
        add("unknown-target", step.action + " via " + via->dump());
    }
    if (step.action == "install_rule" && topo
        && std::holds_alternative<switch_ref>(step.target)) {
      auto& sw = std::get<switch_ref>(step.target).id;
      auto& action = step.params.at("rule").at("action");
      if (action.contains("forward")
          && !hop_consistent(*topo, sw, action.at("forward")))
        add("stale-link",
            sw + " -> " + action.at("forward").get<std::string>());
    }
  }
  for (auto& pol : policies) {
    bool denied = false;
    for (auto& step : p.steps) {
      for (auto& rule : pol.rules)
        if (rule.effect == policy_effect::deny && rule_matches(rule, step))
          denied = true;
    }
    if (denied)
      add(pol.policy_id, "denied by policy");
    if (pol.max_rules_per_switch) {
      std::map<std::string, std::set<std::uint64_t>> tables;
      if (auto t = facts.get("tables"))
        for (auto& [sw, ids] : t->items())
          for (auto& id : ids)
            tables[sw].insert(id.get<std::uint64_t>());
      for (auto& step : p.steps) {
        if (!std::holds_alternative<switch_ref>(step.target))
          continue;
        auto& sw = std::get<switch_ref>(step.target).id;
        if (step.action == "install_rule") {
          tables[sw].insert(
            step.params.at("rule").at("rule_id").get<std::uint64_t>());
          if (static_cast<int>(tables[sw].size()) > *pol.max_rules_per_switch)
            add(pol.policy_id, "rule bound exceeded on " + sw);
        } else if (step.action == "remove_rule") {
          tables[sw].erase(step.params.at("rule_id").get<std::uint64_t>());
        }
      }
    }
  }
  report.passed = report.violations.empty();
  return report;
}

} // namespace agentnet
