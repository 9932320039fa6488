#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "agentnet/core.hpp"

namespace agentnet {

struct event {
  std::string topic;
  datum payload;
  agent_id publisher;
  std::uint64_t seq = 0;
  tick sim_time = 0;
};

enum class distribution_strategy { centralized, distributed, hybrid };

std::string_view to_string(distribution_strategy strategy) noexcept;
distribution_strategy parse_strategy(std::string_view name);

/// Dot-segment match; a trailing `*` segment matches one or more segments.
bool topic_matches(std::string_view filter, std::string_view topic) noexcept;

/// True iff `name` is a non-empty dot-separated ASCII topic.
bool valid_topic(std::string_view name) noexcept;

struct delivery {
  agent_id subscriber;
  agent_id publisher;
  std::uint64_t seq = 0;
  std::string topic;
};

/// A network of event-distribution brokers. Publishers hand events to their
/// home broker; brokers relay over FIFO channels and deliver to their local
/// subscribers. Every broker reorders per publisher and drops duplicates by
/// (publisher, seq), so delivery is exactly-once and per-publisher FIFO
/// regardless of the order in which channels are serviced.
///
///   centralized: one broker.
///   distributed: `width` peer brokers in a full mesh; events are flooded.
///   hybrid:      one broker per GANA level below a central root.
class broker_network {
public:
  explicit broker_network(distribution_strategy strategy,
                          std::size_t width = 4);

  std::uint64_t subscribe(const agent_id& agent, std::string filter);

  void unsubscribe(const agent_id& agent);

  void unsubscribe(std::uint64_t subscription);

  /// Enqueues at the publisher's home broker. Nothing is delivered until the
  /// network is pumped.
  void publish(const event& ev);

  /// Services the head of one non-empty channel picked by `rng`. Returns
  /// false once all channels are empty.
  bool pump(std::mt19937_64& rng);

  /// Services channels in a fixed order until empty.
  void drain();

  /// Publishes and drains; returns the subscribers reached, in delivery order.
  std::vector<agent_id> route(const event& ev);

  std::vector<delivery> take_deliveries();

  std::size_t broker_count() const noexcept {
    return brokers_.size();
  }

  distribution_strategy strategy() const noexcept {
    return strategy_;
  }

private:
  static constexpr int client = -1;

  struct envelope {
    event ev;
    std::uint64_t stamp = 0;
  };

  struct subscription {
    std::uint64_t id = 0;
    agent_id agent;
    std::string filter;
    std::uint64_t stamp = 0;
  };

  struct broker {
    std::vector<subscription> subs;
    std::map<agent_id, std::uint64_t> next_expected;
    std::map<agent_id, std::map<std::uint64_t, envelope>> held;
  };

  int home_of(const agent_id& agent) const;
  void receive(int at, int from, envelope env);
  void accept(int at, int from, const envelope& env);
  void service(std::pair<int, int> channel);

  distribution_strategy strategy_;
  std::vector<broker> brokers_;
  std::map<std::pair<int, int>, std::deque<envelope>> channels_;
  std::map<agent_id, std::uint64_t> first_seq_;
  std::vector<delivery> deliveries_;
  std::uint64_t next_stamp_ = 1;
  std::uint64_t next_sub_ = 1;
};

struct subscribe_op {
  agent_id agent;
  std::string filter;
};

struct publish_op {
  event ev;
};

using trace_op = std::variant<subscribe_op, publish_op>;

/// Per-subscriber list of (publisher, seq) in delivery order.
using delivery_log = std::map<agent_id,
                              std::vector<std::pair<agent_id, std::uint64_t>>>;

/// Replays `trace` over a broker network of the given strategy. Channel
/// service order is randomized by `seed`; every op is applied after the
/// network has reached the same logical position in the trace.
delivery_log run_distribution(distribution_strategy strategy,
                              const std::vector<trace_op>& trace,
                              std::uint64_t seed = 1);

} // namespace agentnet
