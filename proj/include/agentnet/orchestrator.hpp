#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "agentnet/core.hpp"
#include "agentnet/runtime.hpp"

namespace agentnet::orchestration {

struct chain_spec {
  std::vector<function_kind> kinds; // dependency order
  std::map<function_kind, int> instances;
  bool operator==(const chain_spec&) const = default;
};

/// Kinds that `kind` needs in the same chain.
std::vector<function_kind> dependencies(function_kind kind);

/// The requested kinds plus their transitive dependencies, dependencies first
/// and otherwise in kind order.
chain_spec compose_chain(const std::set<function_kind>& requested);
/// Same, from kind names. Throws unknown_kind.
chain_spec compose_chain(const std::vector<std::string>& requested);

/// New requested set after adding and removing kinds. Throws
/// dependency_violation when a removed kind is still needed.
std::set<function_kind> recompose(const std::set<function_kind>& requested,
                                  const std::set<function_kind>& add,
                                  const std::set<function_kind>& remove);

struct demand {
  std::int64_t cpu = 0;
  std::int64_t mem = 0;
  bool operator==(const demand&) const = default;
};

struct compute_node {
  std::string id;
  std::int64_t cpu = 0;
  std::int64_t mem = 0;
  std::map<agent_id, demand> hosted;

  demand free() const;
};

using placement_plan = std::map<agent_id, std::string>;

/// Agents for a chain, instance numbers from zero.
std::vector<agent_id> chain_agents(const chain_spec& chain);

/// First-fit decreasing by cpu demand over `nodes` in order, respecting what
/// they already host. Throws insufficient_capacity.
placement_plan place(const std::vector<agent_id>& agents,
                     const std::vector<compute_node>& nodes,
                     const std::map<function_kind, demand>& demands);
placement_plan place(const chain_spec& chain,
                     const std::vector<compute_node>& nodes,
                     const std::map<function_kind, demand>& demands);

/// True when every node's hosted demand, plus the plan, fits its capacity.
bool feasible(const placement_plan& plan, const std::vector<compute_node>& nodes,
              const std::map<function_kind, demand>& demands);

datum to_datum(const chain_spec& chain);

// -- the orchestrator agent ---------------------------------------------------

struct orchestrator_config {
  std::vector<compute_node> nodes;
  std::map<function_kind, demand> demands;
  /// Facts handed to new agents of a kind, e.g. the topology.
  datum topology = datum::object();
};

/// Registers the orchestrator cognition, behavior and lifecycle effects.
void install(runtime& rt);

/// Spec for the orchestrator agent itself.
agent_spec orchestrator_spec(const orchestrator_config& cfg,
                             const runtime_options& opts);

/// Initial facts an agent of `kind` needs from the deployment.
datum initial_facts(function_kind kind, const datum& topology,
                    const std::string& sw = {});

} // namespace agentnet::orchestration
