#include "agentnet/registry.hpp"

#include <algorithm>

#include "agentnet/error.hpp"

namespace agentnet {

bool offers(const service_descriptor& desc, function_kind kind) noexcept {
  return desc.agent.kind == kind || desc.capabilities.count(kind) > 0;
}

lease service_registry::register_service(const service_descriptor& descriptor,
                                         tick now) {
  if (descriptor.lease_ttl <= 0)
    throw error{errc::schema_error, "lease_ttl must be positive"};
  lease l{descriptor, now, now + descriptor.lease_ttl};
  leases_.insert_or_assign(descriptor.agent, l);
  return l;
}

lease service_registry::heartbeat(const agent_id& agent, tick now) {
  auto i = leases_.find(agent);
  if (i == leases_.end() || i->second.expires_at <= now)
    throw error{errc::no_such_lease, to_string(agent)};
  i->second.expires_at = now + i->second.descriptor.lease_ttl;
  return i->second;
}

void service_registry::deregister(const agent_id& agent) {
  if (leases_.erase(agent) == 0)
    throw error{errc::no_such_lease, to_string(agent)};
}

std::vector<service_descriptor>
service_registry::discover(function_kind kind, std::optional<gana_level> level,
                           tick now) const {
  std::vector<service_descriptor> out;
  for (auto& [id, l] : leases_) {
    if (l.expires_at <= now || !offers(l.descriptor, kind))
      continue;
    if (level && id.level != *level)
      continue;
    out.push_back(l.descriptor);
  }
  std::stable_sort(out.begin(), out.end(), [](auto& a, auto& b) {
    return a.agent.instance < b.agent.instance;
  });
  return out;
}

std::vector<service_descriptor> service_registry::live(tick now) const {
  std::vector<service_descriptor> out;
  for (auto& [id, l] : leases_)
    if (l.expires_at > now)
      out.push_back(l.descriptor);
  return out;
}

std::optional<lease> service_registry::find(const agent_id& agent) const {
  auto i = leases_.find(agent);
  if (i == leases_.end())
    return std::nullopt;
  return i->second;
}

datum service_registry::to_datum() const {
  datum out = datum::array();
  for (auto& [id, l] : leases_)
    out.push_back({{"descriptor", agentnet::to_datum(l.descriptor)},
                   {"granted_at", l.granted_at},
                   {"expires_at", l.expires_at}});
  return out;
}

service_registry service_registry::from_datum(const datum& value) {
  service_registry reg;
  for (auto& item : value) {
    lease l;
    l.descriptor = service_descriptor_from(item.at("descriptor"));
    l.granted_at = item.at("granted_at").get<tick>();
    l.expires_at = item.at("expires_at").get<tick>();
    reg.leases_.insert_or_assign(l.descriptor.agent, l);
  }
  return reg;
}

} // namespace agentnet
