#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace agentnet {

enum class errc {
  payload_too_large,
  duplicate_agent,
  unknown_cognition,
  decode_error,
  agent_not_live,
  no_such_lease,
  invalid_direction,
  no_upper_agent,
  schema_error,
  dangling_reference,
  self_loop,
  unknown_switch,
  non_adjacent_action,
  unknown_link,
  no_path,
  unknown_node,
  unknown_host,
  unknown_kind,
  insufficient_capacity,
  dependency_violation,
  no_common_profile,
  malformed_frame,
  validation_failed,
  file_error,
};

std::string_view to_string(errc code);

/// Every failure raised by the library carries one of the codes above.
class error : public std::runtime_error {
public:
  error(errc code, const std::string& detail)
    : std::runtime_error(std::string{to_string(code)} + ": " + detail),
      code_(code) {
  }

  errc code() const noexcept {
    return code_;
  }

private:
  errc code_;
};

} // namespace agentnet
