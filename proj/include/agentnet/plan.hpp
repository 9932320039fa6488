#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "agentnet/core.hpp"
#include "agentnet/facts.hpp"

namespace agentnet {

struct switch_ref {
  std::string id;

  auto operator<=>(const switch_ref&) const = default;
};

/// A compute node of the virtualized infrastructure.
struct node_ref {
  std::string id;

  auto operator<=>(const node_ref&) const = default;
};

using plan_target = std::variant<agent_id, switch_ref, topic, node_ref>;

struct plan_step {
  std::string action;
  plan_target target;
  datum params = datum::object();
};

struct plan {
  std::vector<plan_step> steps;
  /// Facts keys that must be present for the plan to be meaningful.
  std::vector<std::string> requires_facts;

  bool empty() const noexcept {
    return steps.empty();
  }
};

// -- policies -----------------------------------------------------------------

enum class policy_effect { allow, deny };

enum class target_class { any, agent, switch_, topic, node };

struct policy_rule {
  policy_effect effect = policy_effect::deny;
  std::string action_kind = "*";
  target_class target = target_class::any;
};

/// Declarative constraint pushed from a higher GANA level onto the kinds in
/// `scope`. Deny overrides allow; no matching rule means allowed.
struct policy {
  std::string policy_id;
  gana_level issuer_level = gana_level::network;
  std::set<function_kind> scope;
  std::vector<policy_rule> rules;
  std::optional<int> max_rules_per_switch;
};

datum to_datum(const policy& p);
policy policy_from(const datum& value);

// -- validation ---------------------------------------------------------------

struct violation {
  std::string constraint;
  std::string detail;

  bool operator==(const violation&) const = default;
};

struct validation_report {
  bool passed = true;
  std::vector<violation> violations;
};

/// Consistency check of a plan against the agent's facts and the policies it
/// has received. Fails on an empty plan, a missing required fact, a target
/// absent from facts, a forwarding step over a link the facts know to be
/// down, or any policy denial or bound.
validation_report validate_plan(const plan& p, const facts_store& facts,
                                std::span<const policy> policies);

std::string to_string(const plan_target& target);
target_class class_of(const plan_target& target) noexcept;

} // namespace agentnet
