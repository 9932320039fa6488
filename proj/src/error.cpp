#include "agentnet/error.hpp"

namespace agentnet {

std::string_view to_string(errc code) {
  switch (code) {
    case errc::payload_too_large: return "PayloadTooLarge";
    case errc::duplicate_agent: return "DuplicateAgent";
    case errc::unknown_cognition: return "UnknownCognition";
    case errc::decode_error: return "DecodeError";
    case errc::agent_not_live: return "AgentNotLive";
    case errc::no_such_lease: return "NoSuchLease";
    case errc::invalid_direction: return "InvalidDirection";
    case errc::no_upper_agent: return "NoUpperAgent";
    case errc::schema_error: return "SchemaError";
    case errc::dangling_reference: return "DanglingReference";
    case errc::self_loop: return "SelfLoop";
    case errc::unknown_switch: return "UnknownSwitch";
    case errc::non_adjacent_action: return "NonAdjacentAction";
    case errc::unknown_link: return "UnknownLink";
    case errc::no_path: return "NoPath";
    case errc::unknown_node: return "UnknownNode";
    case errc::unknown_host: return "UnknownHost";
    case errc::unknown_kind: return "UnknownKind";
    case errc::insufficient_capacity: return "InsufficientCapacity";
    case errc::dependency_violation: return "DependencyViolation";
    case errc::no_common_profile: return "NoCommonProfile";
    case errc::malformed_frame: return "MalformedFrame";
    case errc::validation_failed: return "ValidationFailed";
    case errc::file_error: return "FileError";
  }
  return "Unknown";
}

} // namespace agentnet
