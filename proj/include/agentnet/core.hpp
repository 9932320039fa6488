#pragma once

#include <atomic>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace agentnet {

/// Structured facts and payload bodies: scalars, lists, maps.
using datum = nlohmann::json;

/// Simulated time, in integer ticks.
using tick = std::int64_t;

using bytes = std::vector<std::uint8_t>;

// -- GANA levels and function kinds -------------------------------------------

enum class gana_level : std::uint8_t {
  protocol = 0,
  function = 1,
  node = 2,
  network = 3,
};

enum class function_kind : std::uint8_t {
  // function level
  routing,
  forwarding,
  qos,
  mobility,
  monitoring,
  service_app,
  // node level
  security,
  fault,
  auto_config_discovery,
  resilience,
  // plumbing
  topology,
  classifier,
  session,
  orchestration,
  event_distribution,
  registry,
  switch_adapter,
};

inline constexpr function_kind all_function_kinds[] = {
  function_kind::routing,       function_kind::forwarding,
  function_kind::qos,           function_kind::mobility,
  function_kind::monitoring,    function_kind::service_app,
  function_kind::security,      function_kind::fault,
  function_kind::auto_config_discovery,
  function_kind::resilience,    function_kind::topology,
  function_kind::classifier,    function_kind::session,
  function_kind::orchestration, function_kind::event_distribution,
  function_kind::registry,      function_kind::switch_adapter,
};

/// Canonical GANA level of each function kind.
gana_level level_of(function_kind kind) noexcept;

std::string_view to_string(gana_level level) noexcept;
std::string_view to_string(function_kind kind) noexcept;

std::optional<gana_level> parse_level(std::string_view name) noexcept;
std::optional<function_kind> parse_kind(std::string_view name) noexcept;

// -- identities ---------------------------------------------------------------

struct agent_id {
  function_kind kind = function_kind::routing;
  gana_level level = gana_level::function;
  std::uint32_t instance = 0;

  static agent_id of(function_kind kind, std::uint32_t instance) noexcept {
    return agent_id{kind, level_of(kind), instance};
  }

  auto operator<=>(const agent_id&) const = default;
};

/// Renders as `Kind#instance`, e.g. `Routing#0`.
std::string to_string(const agent_id& id);

std::optional<agent_id> parse_agent_id(std::string_view text);

struct topic {
  std::string name;

  auto operator<=>(const topic&) const = default;
};

using destination = std::variant<agent_id, topic>;

std::string to_string(const destination& dst);

// -- messages -----------------------------------------------------------------

enum class message_kind : std::uint8_t {
  request = 0,
  response = 1,
  event = 2,
  policy = 3,
};

std::string_view to_string(message_kind kind) noexcept;
std::optional<message_kind> parse_message_kind(std::string_view name) noexcept;

struct message {
  std::uint64_t msg_id = 0;
  agent_id src;
  destination dst;
  message_kind kind = message_kind::event;
  std::optional<std::uint64_t> correlation_id;
  bytes payload;
  tick sim_time = 0;

  bool operator==(const message&) const = default;
};

/// Payload helpers: bodies travel as compact JSON text.
bytes encode_body(const datum& body);
datum decode_body(std::span<const std::uint8_t> payload);

/// Allocates message ids. The counter is the only shared mutable state of
/// the vocabulary layer and is incremented atomically.
class message_factory {
public:
  explicit message_factory(std::size_t max_payload = 1u << 20) noexcept
    : max_payload_(max_payload) {
  }

  message make(const agent_id& src, destination dst, message_kind kind,
               bytes payload, tick now,
               std::optional<std::uint64_t> correlation = std::nullopt);

  std::size_t max_payload() const noexcept {
    return max_payload_;
  }

  void set_max_payload(std::size_t value) noexcept {
    max_payload_ = value;
  }

  std::uint64_t last_id() const noexcept {
    return next_.load() - 1;
  }

private:
  std::atomic<std::uint64_t> next_{1};
  std::size_t max_payload_;
};

/// Uses the process-wide factory.
message new_message(const agent_id& src, destination dst, message_kind kind,
                    bytes payload, tick now);

message_factory& default_message_factory();

// -- service descriptors ------------------------------------------------------

struct service_descriptor {
  agent_id agent;
  std::set<function_kind> capabilities;
  std::string endpoint;
  tick lease_ttl = 1;

  bool operator==(const service_descriptor&) const = default;
};

datum to_datum(const agent_id& id);
agent_id agent_id_from(const datum& value);
datum to_datum(const service_descriptor& desc);
service_descriptor service_descriptor_from(const datum& value);

} // namespace agentnet
