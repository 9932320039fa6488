#include "agentnet/core.hpp"

#include <charconv>

#include "agentnet/error.hpp"

namespace agentnet {

gana_level level_of(function_kind kind) noexcept {
  switch (kind) {
    case function_kind::routing:
    case function_kind::forwarding:
    case function_kind::qos:
    case function_kind::mobility:
    case function_kind::monitoring:
    case function_kind::service_app:
    case function_kind::topology:
    case function_kind::classifier:
    case function_kind::session:
      return gana_level::function;
    case function_kind::security:
    case function_kind::fault:
    case function_kind::auto_config_discovery:
    case function_kind::resilience:
    case function_kind::switch_adapter:
      return gana_level::node;
    case function_kind::orchestration:
    case function_kind::event_distribution:
    case function_kind::registry:
      return gana_level::network;
  }
  return gana_level::function;
}

std::string_view to_string(gana_level level) noexcept {
  switch (level) {
    case gana_level::protocol: return "Protocol";
    case gana_level::function: return "Function";
    case gana_level::node: return "Node";
    case gana_level::network: return "Network";
  }
  return "?";
}

std::string_view to_string(function_kind kind) noexcept {
  switch (kind) {
    case function_kind::routing: return "Routing";
    case function_kind::forwarding: return "Forwarding";
    case function_kind::qos: return "QoS";
    case function_kind::mobility: return "Mobility";
    case function_kind::monitoring: return "Monitoring";
    case function_kind::service_app: return "ServiceApp";
    case function_kind::security: return "Security";
    case function_kind::fault: return "Fault";
    case function_kind::auto_config_discovery: return "AutoConfigDiscovery";
    case function_kind::resilience: return "Resilience";
    case function_kind::topology: return "Topology";
    case function_kind::classifier: return "Classifier";
    case function_kind::session: return "Session";
    case function_kind::orchestration: return "Orchestration";
    case function_kind::event_distribution: return "EventDistribution";
    case function_kind::registry: return "Registry";
    case function_kind::switch_adapter: return "SwitchAdapter";
  }
  return "?";
}

std::optional<gana_level> parse_level(std::string_view name) noexcept {
  for (auto lvl : {gana_level::protocol, gana_level::function,
                   gana_level::node, gana_level::network})
    if (to_string(lvl) == name)
      return lvl;
  return std::nullopt;
}

std::optional<function_kind> parse_kind(std::string_view name) noexcept {
  for (auto kind : all_function_kinds)
    if (to_string(kind) == name)
      return kind;
  return std::nullopt;
}

std::string to_string(const agent_id& id) {
  std::string out{to_string(id.kind)};
  out += '#';
  out += std::to_string(id.instance);
  return out;
}

std::optional<agent_id> parse_agent_id(std::string_view text) {
  auto hash = text.find('#');
  if (hash == std::string_view::npos)
    return std::nullopt;
  auto kind = parse_kind(text.substr(0, hash));
  if (!kind)
    return std::nullopt;
  auto digits = text.substr(hash + 1);
  std::uint32_t instance = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(),
                                   instance);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()
      || digits.empty())
    return std::nullopt;
  return agent_id::of(*kind, instance);
}

std::string to_string(const destination& dst) {
  if (auto id = std::get_if<agent_id>(&dst))
    return to_string(*id);
  return std::get<topic>(dst).name;
}

std::string_view to_string(message_kind kind) noexcept {
  switch (kind) {
    case message_kind::request: return "Request";
    case message_kind::response: return "Response";
    case message_kind::event: return "Event";
    case message_kind::policy: return "Policy";
  }
  return "?";
}

std::optional<message_kind> parse_message_kind(std::string_view name) noexcept {
  for (auto kind : {message_kind::request, message_kind::response,
                    message_kind::event, message_kind::policy})
    if (to_string(kind) == name)
      return kind;
  return std::nullopt;
}

bytes encode_body(const datum& body) {
  auto text = body.dump();
  return bytes(text.begin(), text.end());
}

datum decode_body(std::span<const std::uint8_t> payload) {
  if (payload.empty())
    return datum{};
  auto result = datum::parse(payload.begin(), payload.end(), nullptr, false);
  if (result.is_discarded())
    throw error{errc::decode_error, "payload is not a structured body"};
  return result;
}

message message_factory::make(const agent_id& src, destination dst,
                              message_kind kind, bytes payload, tick now,
                              std::optional<std::uint64_t> correlation) {
  if (payload.size() > max_payload_)
    throw error{errc::payload_too_large,
                std::to_string(payload.size()) + " > "
                  + std::to_string(max_payload_)};
  message msg;
  msg.msg_id = next_.fetch_add(1, std::memory_order_relaxed);
  msg.src = src;
  msg.dst = std::move(dst);
  msg.kind = kind;
  msg.correlation_id = correlation;
  msg.payload = std::move(payload);
  msg.sim_time = now;
  return msg;
}

message_factory& default_message_factory() {
  static message_factory instance;
  return instance;
}

message new_message(const agent_id& src, destination dst, message_kind kind,
                    bytes payload, tick now) {
  return default_message_factory().make(src, std::move(dst), kind,
                                        std::move(payload), now);
}

datum to_datum(const agent_id& id) {
  return to_string(id);
}

agent_id agent_id_from(const datum& value) {
  if (!value.is_string())
    throw error{errc::decode_error, "agent id must be a string"};
  auto id = parse_agent_id(value.get<std::string>());
  if (!id)
    throw error{errc::decode_error, "bad agent id " + value.dump()};
  return *id;
}

datum to_datum(const service_descriptor& desc) {
  datum caps = datum::array();
  for (auto kind : desc.capabilities)
    caps.push_back(std::string{to_string(kind)});
  return datum{{"agent", to_datum(desc.agent)},
               {"capabilities", caps},
               {"endpoint", desc.endpoint},
               {"lease_ttl", desc.lease_ttl}};
}

service_descriptor service_descriptor_from(const datum& value) {
  service_descriptor desc;
  desc.agent = agent_id_from(value.at("agent"));
  for (auto& cap : value.at("capabilities")) {
    auto kind = parse_kind(cap.get<std::string>());
    if (!kind)
      throw error{errc::decode_error, "unknown capability " + cap.dump()};
    desc.capabilities.insert(*kind);
  }
  desc.endpoint = value.at("endpoint").get<std::string>();
  desc.lease_ttl = value.at("lease_ttl").get<tick>();
  return desc;
}

} // namespace agentnet
