#pragma once

// Programmable protocol stack: negotiable per-link message profiles.
//
// Binary frames are a 4-byte big-endian length prefix followed by the body:
//
//   u64 msg_id
//   u8 src.kind | u8 src.level | u32 src.instance
//   u8 dst tag (0 = agent, 1 = topic)
//     agent: u8 kind | u8 level | u32 instance
//     topic: u16 length | bytes
//   u8 kind
//   u8 has_correlation | [u64 correlation_id]
//   i64 sim_time
//   u32 payload length | payload
//
// All integers are big-endian. The text codec is a JSON object with the
// message field names; the payload is rendered as lowercase hex.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "agentnet/core.hpp"

namespace agentnet::pps {

enum class codec : std::uint8_t { text_structured, binary_length_prefixed };

enum class reliability : std::uint8_t { at_most_once, at_least_once };

struct stack_profile {
  std::string id;
  pps::codec codec = codec::binary_length_prefixed;
  pps::reliability reliability = reliability::at_most_once;
  std::size_t max_payload = 1u << 20;

  bool operator==(const stack_profile&) const = default;
};

/// Picks the mutually supported profile ranked highest by the initiator `a`.
stack_profile negotiate(std::span<const stack_profile> offered_a,
                        std::span<const stack_profile> offered_b);

/// Mutually supported profiles in `a` order.
std::vector<stack_profile> common_profiles(std::span<const stack_profile> a,
                                           std::span<const stack_profile> b);

bytes encode(const message& msg, const stack_profile& profile);

message decode(std::span<const std::uint8_t> frame,
               const stack_profile& profile);

/// Built-in profiles used when a run configuration names none.
std::vector<stack_profile> default_profiles();

datum to_datum(const stack_profile& profile);
stack_profile profile_from(const datum& value);

} // namespace agentnet::pps
