#pragma once

#include <optional>
#include <string>
#include <vector>

#include "agentnet/control.hpp"
#include "agentnet/runtime.hpp"

/// Pipeline halves and cognitions of the SDN function agents.
namespace agentnet::agents {

struct agents_config {
  control::classifier_config classifier;
  control::qos_config qos;
};

/// Registers a cognition and a behavior for every function kind except the
/// orchestrator. The "southbound" effect used by switch adapters is left to
/// whoever owns the data plane.
void install(runtime& rt, const agents_config& cfg = {});

/// Name of the stock cognition for a kind.
std::string default_cognition(function_kind kind);

/// Topics an agent of this kind listens on.
std::vector<std::string> default_subscriptions(function_kind kind);

/// Stock spec: cognition, subscriptions and an empty facts object.
agent_spec default_spec(agent_id id);

/// Lowest-instance peer of a kind, from the membership in facts.
std::optional<agent_id> first_peer(const facts_store& facts,
                                   function_kind kind);

} // namespace agentnet::agents
