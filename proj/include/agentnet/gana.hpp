#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agentnet/core.hpp"
#include "agentnet/plan.hpp"

namespace agentnet {

class runtime;

struct escalation {
  agent_id from;
  datum issue;
  tick raised_at = 0;
};

struct escalation_receipt {
  agent_id handler;
  std::uint64_t msg_id = 0;
};

/// Throws invalid_direction unless the issuer sits strictly above the level
/// of every kind in scope.
void check_policy_direction(const policy& p);

/// Delivers `p` as a Policy message to every live agent whose kind is in
/// scope; returns the number of recipients.
std::size_t push_policy(runtime& rt, const policy& p);

/// Picks the handler one level above `from`: Fault at Node level,
/// Orchestration at Network level, any other kind of that level otherwise;
/// ties go to the lowest instance.
std::optional<agent_id> select_upper(const agent_id& from,
                                     std::span<const agent_id> candidates);

/// Sends the issue as a Request to the selected upper-level agent.
escalation_receipt escalate(runtime& rt, const escalation& esc);

// -- knowledge plane ----------------------------------------------------------

struct view_entry {
  datum value;
  tick updated_at = 0;

  bool operator==(const view_entry&) const = default;
};

/// Network-wide view: node id -> keyed entries (topology fragments, stats,
/// agent health, exported facts).
struct knowledge_view {
  std::map<std::string, std::map<std::string, view_entry>> nodes;
  tick merged_at = 0;

  bool operator==(const knowledge_view&) const = default;
};

/// Union of the contributions; the most recent `updated_at` wins a key
/// conflict, and equal timestamps fall back to the larger serialized value so
/// the merge is order-insensitive.
knowledge_view aggregate_view(std::span<const knowledge_view> contributions);

datum to_datum(const knowledge_view& view);
knowledge_view knowledge_view_from(const datum& value);

} // namespace agentnet
