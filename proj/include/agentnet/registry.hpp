#pragma once

#include <map>
#include <optional>
#include <vector>

#include "agentnet/core.hpp"

namespace agentnet {

struct lease {
  service_descriptor descriptor;
  tick granted_at = 0;
  tick expires_at = 0;

  bool operator==(const lease&) const = default;
};

/// Service registration and discovery with TTL leases. A lease is live while
/// `expires_at > now`. Application registrations use `service_app` as their
/// capability and share this table.
class service_registry {
public:
  lease register_service(const service_descriptor& descriptor, tick now);

  lease heartbeat(const agent_id& agent, tick now);

  void deregister(const agent_id& agent);

  /// Live descriptors offering `kind` (optionally at `level`), ordered by
  /// instance ascending.
  std::vector<service_descriptor>
  discover(function_kind kind, std::optional<gana_level> level, tick now) const;

  /// Every live descriptor, ordered by agent id.
  std::vector<service_descriptor> live(tick now) const;

  std::optional<lease> find(const agent_id& agent) const;

  const std::map<agent_id, lease>& leases() const noexcept {
    return leases_;
  }

  datum to_datum() const;
  static service_registry from_datum(const datum& value);

private:
  std::map<agent_id, lease> leases_;
};

bool offers(const service_descriptor& desc, function_kind kind) noexcept;

} // namespace agentnet
