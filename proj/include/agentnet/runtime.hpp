#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "agentnet/core.hpp"
#include "agentnet/event_plane.hpp"
#include "agentnet/facts.hpp"
#include "agentnet/plan.hpp"
#include "agentnet/pps.hpp"
#include "agentnet/registry.hpp"

namespace agentnet {

/// The agent pipeline, in execution order.
enum class stage : std::uint8_t {
  input,
  facts,
  cognition,
  planning,
  validation,
  output,
};

std::string_view to_string(stage s) noexcept;

struct stage_record {
  tick at = 0;
  agent_id agent;
  std::uint64_t input = 0; // msg_id of the message being processed
  stage st = stage::input;
  bool passed = true; // meaningful for the validation stage
  std::vector<std::uint64_t> actions; // output stage: emitted action ids
  std::string detail;
};

datum to_datum(const stage_record& rec);

struct cognition_outcome {
  datum decision;
  double confidence = 1.0;
};

/// Pure function from (facts snapshot, input) to a decision.
using cognition_fn = std::function<cognition_outcome(
  const facts_store& facts, const message& input, const datum& body)>;

class cognition_registry {
public:
  void add(std::string name, cognition_fn fn);

  const cognition_fn* find(const std::string& name) const;

private:
  std::map<std::string, cognition_fn> fns_;
};

struct agent_spec {
  agent_id id;
  std::string cognition;
  std::vector<std::string> subscriptions;
  datum initial_facts = datum::object();
  /// Offered profiles in preference order; empty means the runtime default.
  std::vector<pps::stack_profile> profiles;
  std::string endpoint;
  std::set<function_kind> capabilities;
  /// Compute node hosting the agent; empty for infrastructure agents.
  std::string node;
};

/// Kind-specific halves of the pipeline. `absorb` folds an input into facts;
/// `planner` turns a decision into steps. An empty plan means nothing to do.
struct behavior {
  std::function<void(facts_store&, const message&, const datum&, tick)> absorb;
  std::function<plan(const cognition_outcome&, const facts_store&,
                     const message&, const datum&)>
    planner;
};

class runtime;

/// Side effect of a non-message plan step (southbound writes, lifecycle).
using effect_fn = std::function<std::vector<message>(
  runtime&, const agent_id& actor, const plan_step& step)>;

struct runtime_options {
  double escalation_threshold = 0.5;
  tick heartbeat_interval = 10;
  tick lease_ttl = 31;
  distribution_strategy strategy = distribution_strategy::centralized;
  /// Fault injection on reliable links: returning true duplicates the frame.
  std::function<bool(const message&)> duplicate;
  /// Fault injection on best-effort links: returning true drops the frame.
  std::function<bool(const message&)> drop;
  std::vector<pps::stack_profile> profiles = pps::default_profiles();
  bool export_digests = true;
  bool keep_stage_log = true;
};

/// Topic prefixes for background traffic that does not affect quiescence.
bool is_housekeeping(const destination& dst);

/// Hosts agents, runs their pipelines and carries their messages. Delivery is
/// deterministic and single-threaded: a message sent at tick t is delivered
/// at t+1, in send order. Each agent processes its inputs sequentially.
class runtime {
public:
  explicit runtime(runtime_options options = {});

  cognition_registry& cognitions() noexcept {
    return cognitions_;
  }

  void set_behavior(function_kind kind, behavior b);

  void set_effect(const std::string& action, effect_fn fn);

  // -- lifecycle --------------------------------------------------------------

  agent_id spawn_agent(const agent_spec& spec);

  /// Clean shutdown: unsubscribed, deregistered, pending mail discarded.
  void stop_agent(const agent_id& id);

  /// Crash: the agent stops processing but keeps its registrations; mail
  /// addressed to it is held until a replacement is named by `redirect`.
  void kill_agent(const agent_id& id);

  void redirect(const agent_id& from, const agent_id& to);

  /// Gives up on a crashed agent: held mail is dropped, as is later mail.
  /// Returns the number of messages dropped.
  std::size_t abandon(const agent_id& id);

  bool is_live(const agent_id& id) const;
  /// Replacement named for a crashed agent, following redirects.
  std::optional<agent_id> alias_of(const agent_id& id) const;

  std::vector<agent_id> live_agents() const;

  const agent_spec& spec_of(const agent_id& id) const;

  const facts_store& facts(const agent_id& id) const;

  std::vector<policy> policies(const agent_id& id) const;

  // -- pipeline ---------------------------------------------------------------

  /// Runs INPUT -> FACTS -> COGNITION -> PLANNING -> VALIDATION -> OUTPUT and
  /// returns the messages to send. Actions are only emitted for a plan that
  /// passed validation; a failed plan yields one diagnostic Event instead.
  std::vector<message> process_input(const agent_id& id, const message& input);

  std::uint64_t update_facts(const agent_id& id, const std::string& key,
                             datum value);

  // -- messaging --------------------------------------------------------------

  message make(const agent_id& src, destination dst, message_kind kind,
               const datum& body,
               std::optional<std::uint64_t> correlation = std::nullopt);

  /// Queues for delivery on the next tick.
  void send(message msg);

  /// Queues for delivery in the current tick.
  void inject(message msg);

  /// Delivers everything due at or before now().
  void deliver_due();

  /// Emits heartbeats and timers, then advances the clock.
  void end_tick();

  tick now() const noexcept {
    return now_;
  }

  /// No control traffic in flight and no mail held for crashed agents.
  bool quiescent() const;

  // -- registry access --------------------------------------------------------

  void register_direct(const service_descriptor& desc);
  void deregister_direct(const agent_id& id);
  std::vector<service_descriptor>
  discover(function_kind kind, std::optional<gana_level> level) const;
  std::optional<lease> lease_of(const agent_id& id) const;
  /// Publishes the current membership from the live registry agent.
  void announce_membership();

  // -- logs -------------------------------------------------------------------

  const std::vector<stage_record>& stage_log() const noexcept {
    return stage_log_;
  }

  /// Messages dropped or rejected by the bus, for diagnostics.
  const std::vector<std::string>& bus_log() const noexcept {
    return bus_log_;
  }

  message_factory& messages() noexcept {
    return factory_;
  }

  const runtime_options& options() const noexcept {
    return opts_;
  }

  std::uint64_t delivered_count() const noexcept {
    return delivered_;
  }
  /// Diagnostic events emitted for plans that failed validation.
  std::uint64_t violation_count() const noexcept {
    return violations_;
  }

private:
  struct agent_state {
    agent_spec spec;
    facts_store facts;
    bool live = true;
    bool crashed = false;
    std::set<std::pair<agent_id, std::uint64_t>> seen;
    std::uint64_t exported_writes = 0;
  };

  struct pending {
    agent_id to;
    bytes frame;
    pps::stack_profile profile;
    bool housekeeping = false;
  };

  agent_state& state(const agent_id& id);
  const agent_state& state(const agent_id& id) const;
  std::optional<agent_id> registry_agent() const;
  service_registry load_registry(const agent_id& reg) const;
  void store_registry(const agent_id& reg, const service_registry& table);
  const pps::stack_profile& link_profile(const agent_id& src,
                                         const agent_id& dst);
  void enqueue(const message& msg, const agent_id& to, tick due);
  void route(message msg, tick due);
  void record(stage_record rec);
  std::vector<message> run_output(agent_state& agent, const message& input,
                                  const plan& p);
  void export_digest(agent_state& agent);

  runtime_options opts_;
  cognition_registry cognitions_;
  std::map<function_kind, behavior> behaviors_;
  std::map<std::string, effect_fn> effects_;
  std::map<agent_id, agent_state> agents_;
  broker_network brokers_;
  std::map<agent_id, std::uint64_t> publish_seq_;
  std::map<std::pair<agent_id, agent_id>, pps::stack_profile> profiles_;
  std::map<std::pair<tick, std::uint64_t>, pending> queue_;
  std::uint64_t queue_seq_ = 0;
  std::map<agent_id, std::deque<pending>> dead_letters_;
  std::map<agent_id, agent_id> alias_;
  std::vector<service_descriptor> pending_registrations_;
  std::vector<stage_record> stage_log_;
  std::vector<std::string> bus_log_;
  message_factory factory_;
  tick now_ = 0;
  bool timer_send_ = false;
  std::uint64_t delivered_ = 0;
  std::uint64_t violations_ = 0;
};

} // namespace agentnet
