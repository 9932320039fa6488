#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "agentnet/core.hpp"
#include "agentnet/netsim.hpp"
#include "agentnet/plan.hpp"

/// Control logic shared by the function agents and the monolithic controller.
namespace agentnet::control {

// -- classification -----------------------------------------------------------

enum class flow_class : std::uint8_t { bulk, interactive, realtime };

std::string_view to_string(flow_class c) noexcept;
std::optional<flow_class> parse_flow_class(std::string_view name) noexcept;

struct flow_features {
  std::int64_t size = 0;
  tick interarrival = 1;
  std::string hint; // declared class, may be empty
};

struct classifier_config {
  std::int64_t size_threshold = 40;  // S
  tick interarrival_threshold = 2;   // I
};

/// size > S => Bulk; inter-arrival < I => RealTime; otherwise Interactive.
flow_class classify_flow(const flow_features& f,
                         const classifier_config& cfg = {}) noexcept;

/// Class taken from the declared hint, for chains without a classifier.
flow_class class_from_hint(const std::string& hint) noexcept;

// -- routing ------------------------------------------------------------------

struct path_result {
  std::vector<std::string> nodes;
  std::int64_t cost = 0;
  bool operator==(const path_result&) const = default;
};

/// Minimum-latency path over up links between two switches; among equal-cost
/// paths the lexicographically smallest node sequence. Throws unknown_node or
/// no_path.
path_result compute_path(const netsim::topology& view, const std::string& src,
                         const std::string& dst);

/// Links of a path as (a, b) with a < b.
std::vector<std::pair<std::string, std::string>>
path_links(const std::vector<std::string>& nodes);

bool path_uses(const std::vector<std::string>& nodes, const std::string& a,
               const std::string& b);

/// One rule per switch: forward to the next switch, the last one to the host.
/// Rule ids are left zero.
std::vector<netsim::flow_rule> rules_for_path(const path_result& path,
                                              const std::string& src_host,
                                              const std::string& dst_host,
                                              int priority = 10);

// -- admission ----------------------------------------------------------------

struct qos_config {
  int cap_percent = 80;
  std::int64_t realtime_demand = 1;
};

/// Reservation ledger. Only RealTime sessions reserve; others always pass.
class qos_book {
public:
  explicit qos_book(qos_config cfg = {}) : cfg_(cfg) {
  }

  /// Reserves along every link of `nodes`, or nothing when any link would
  /// exceed its cap.
  bool admit(std::uint64_t session, flow_class cls,
             const std::vector<std::string>& nodes,
             const netsim::topology& topo);

  void release(std::uint64_t session);

  std::int64_t reserved(const std::string& a, const std::string& b) const;

  bool holds(std::uint64_t session) const {
    return holds_.count(session) > 0;
  }

  datum to_datum() const;
  static qos_book from_datum(const datum& value, qos_config cfg);

private:
  qos_config cfg_;
  std::map<std::string, std::int64_t> reserved_; // "a|b" -> units
  std::map<std::uint64_t, std::vector<std::string>> holds_; // session -> links
  std::map<std::uint64_t, std::int64_t> demand_;
};

// -- sessions -----------------------------------------------------------------

enum class session_state : std::uint8_t { active, updating, removed };

std::string_view to_string(session_state s) noexcept;

struct session {
  std::uint64_t id = 0;
  std::string src;
  std::string dst;
  flow_class cls = flow_class::interactive;
  session_state state = session_state::updating;
  std::string reason; // why a session was removed
  std::vector<std::string> path;
  std::vector<std::uint64_t> rule_ids;
  bool operator==(const session&) const = default;
};

datum to_datum(const session& s);
session session_from(const datum& value);

// -- forwarding ---------------------------------------------------------------

/// The rules a forwarding function believes are installed.
struct forwarding_state {
  std::map<std::uint64_t, netsim::flow_rule> rules;
  std::uint64_t next_rule_id = 1;

  /// switch -> rule ids, as kept in facts under "tables".
  datum tables() const;
  datum rules_datum() const;
  static forwarding_state from(const datum& rules, std::uint64_t next);

  /// Gives each rule the next id.
  std::vector<netsim::flow_rule> assign_ids(std::vector<netsim::flow_rule> r);
  void apply(const std::vector<std::uint64_t>& remove,
             const std::vector<netsim::flow_rule>& install);
};

using adapter_lookup =
  std::function<std::optional<agent_id>(const std::string& sw)>;

/// Removal steps then install steps. With an adapter lookup each step names
/// the adapter that relays it to the switch.
plan forwarding_plan(const forwarding_state& fwd,
                     const std::vector<std::uint64_t>& remove,
                     const std::vector<netsim::flow_rule>& install,
                     const adapter_lookup& adapter_of = {});

// -- direct controller --------------------------------------------------------

struct controller_config {
  classifier_config classifier;
  qos_config qos;
  bool use_classifier = true;
  bool use_qos = true;
  std::vector<policy> policies;
};

/// Southbound operations produced by a controller call, removals first.
struct southbound {
  std::vector<std::uint64_t> removed;
  std::vector<netsim::flow_rule> installed;
};

/// The full control loop as direct calls, without agents.
class controller {
public:
  controller(netsim::topology topo, controller_config cfg = {});

  /// Opens a session and sets up its path. Throws unknown_host, or no_path
  /// after recording the session as removed.
  const session& create_session(const std::string& src, const std::string& dst,
                                flow_class cls);
  /// Recomputes the path under a new class; the session id is kept.
  const session& update_session(std::uint64_t id, flow_class cls);
  void remove_session(std::uint64_t id);

  /// Handles a table miss; repeated pairs are ignored.
  void on_packet_in(const netsim::packet_in& ev);
  /// Proactive setup from a declared flow.
  void prepare(const netsim::flow_spec& flow);
  /// Reroutes Active sessions crossing the link. Returns the ids touched.
  std::vector<std::uint64_t> on_link_down(const std::string& a,
                                          const std::string& b);
  void on_link_up(const std::string& a, const std::string& b);

  southbound take_southbound();

  const std::map<std::uint64_t, session>& sessions() const noexcept {
    return sessions_;
  }
  const forwarding_state& forwarding() const noexcept {
    return fwd_;
  }
  const netsim::topology& topo() const noexcept {
    return topo_;
  }
  /// Issues raised for a higher level (no-path, unroutable).
  const std::vector<datum>& escalations() const noexcept {
    return escalations_;
  }

private:
  session& open(const std::string& src, const std::string& dst,
                flow_class cls);
  /// Path, admission and forwarding for one session. `reroute` releases and
  /// replaces what the session holds.
  void settle(session& s, bool reroute);

  netsim::topology topo_;
  controller_config cfg_;
  qos_book qos_;
  forwarding_state fwd_;
  std::map<std::uint64_t, session> sessions_;
  std::set<std::pair<std::string, std::string>> seen_pairs_;
  std::uint64_t next_session_ = 1;
  southbound pending_;
  std::vector<datum> escalations_;
};

} // namespace agentnet::control
