#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "agentnet/core.hpp"

namespace agentnet::netsim {

// -- topology -----------------------------------------------------------------

struct link {
  std::string a; // a < b
  std::string b;
  std::int64_t capacity = 1; // units per tick
  tick latency = 1;
  bool up = true;

  bool operator==(const link&) const = default;
};

struct topology {
  std::vector<std::string> switches; // sorted
  std::map<std::string, std::string> hosts; // host -> attached switch
  std::vector<link> links; // sorted by (a, b)

  bool has_switch(const std::string& id) const;
  bool has_host(const std::string& id) const;
  const link* find_link(const std::string& x, const std::string& y) const;
  link* find_link(const std::string& x, const std::string& y);

  /// Switches adjacent over up links, sorted.
  std::vector<std::pair<std::string, const link*>>
  up_neighbors(const std::string& sw) const;

  datum to_datum() const;

  bool operator==(const topology&) const = default;
};

/// Parses and validates a topology document:
///   {"switches": [..], "hosts": {host: switch}, "links": [{"a","b",
///    "capacity","latency"}]}
/// Links join switches; hosts attach through the `hosts` map.
topology load_topology(const datum& document);
topology load_topology_file(const std::filesystem::path& path);

// -- flow rules ---------------------------------------------------------------

struct flow_match {
  bool wildcard = false;
  std::string src;
  std::string dst;

  bool covers(const std::string& s, const std::string& d) const noexcept {
    return wildcard || (src == s && dst == d);
  }

  auto operator<=>(const flow_match&) const = default;
};

struct flow_rule {
  std::string sw;
  flow_match match;
  std::optional<std::string> forward; // next hop; nullopt = drop
  int priority = 0;
  std::uint64_t rule_id = 0;

  bool operator==(const flow_rule&) const = default;
};

datum to_datum(const flow_rule& rule);
flow_rule flow_rule_from(const datum& value);

// -- scenarios ----------------------------------------------------------------

struct flow_spec {
  std::string src;
  std::string dst;
  tick start_tick = 0;
  std::int64_t size = 1;
  std::string cls = "Interactive"; // declared class hint
  tick interval = 1; // ticks between packets

  bool operator==(const flow_spec&) const = default;
};

struct failure_spec {
  std::string a;
  std::string b;
  tick at = 0;

  bool operator==(const failure_spec&) const = default;
};

struct scenario {
  std::uint64_t seed = 1;
  tick duration_ticks = 100;
  std::vector<flow_spec> flows;
  std::vector<failure_spec> failures;
  tick jitter = 2; // maximum arrival jitter in ticks

  datum to_datum() const;

  bool operator==(const scenario&) const = default;
};

/// {"seed", "duration_ticks", "flows": [{"src","dst","start_tick","size",
///  "class"}], "failures": [{"a","b","at"}]}; optional "jitter" and per-flow
/// "interval".
scenario load_scenario(const datum& document);
scenario load_scenario_file(const std::filesystem::path& path);

// -- events -------------------------------------------------------------------

struct packet_in {
  std::string sw;
  std::string src;
  std::string dst;
  std::size_t flow = 0;
  std::int64_t size = 0;
  std::string cls;
  tick interval = 1;
};

struct link_down {
  std::string a;
  std::string b;
};

struct link_up {
  std::string a;
  std::string b;
};

struct link_counter {
  std::string a;
  std::string b;
  std::uint64_t bytes = 0;
  std::uint64_t drops = 0;
};

struct stats_tick {
  std::vector<link_counter> links;
};

struct sim_event {
  tick at = 0;
  std::variant<packet_in, link_down, link_up, stats_tick> body;
};

/// Canonical one-line rendering, used for trace comparison.
std::string to_string(const sim_event& ev);
datum to_datum(const sim_event& ev);

// -- simulator ----------------------------------------------------------------

/// xorshift64* generator; the only source of randomness in a run.
class xorshift64 {
public:
  explicit xorshift64(std::uint64_t seed) noexcept
    : state_(seed == 0 ? 0x9E3779B97F4A7C15ull : seed) {
  }

  std::uint64_t next() noexcept {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1Dull;
  }

  /// Uniform in [0, bound).
  std::uint64_t below(std::uint64_t bound) noexcept {
    return bound == 0 ? 0 : next() % bound;
  }

private:
  std::uint64_t state_;
};

struct sim_options {
  tick packet_in_suppression = 50;
  tick stats_interval = 10;
  std::size_t buffer_limit = 64;
  int max_hops = 64;
  /// When false the caller injects failures through fail_link.
  bool apply_scenario_failures = true;
};

struct flow_metrics {
  tick start = 0; // after jitter
  std::optional<tick> first_forward;
  std::int64_t sent = 0;
  std::int64_t delivered = 0;
};

struct stats_row {
  tick at = 0;
  std::string a;
  std::string b;
  std::uint64_t bytes = 0;
  std::uint64_t drops = 0;
};

class simulator {
public:
  simulator(topology topo, scenario scen, sim_options options = {});

  /// Runs tick `now()` and advances the clock by one.
  std::vector<sim_event> step();

  /// Takes effect at the start of the next step. Re-installing an existing
  /// rule_id replaces it.
  void install_rule(const flow_rule& rule);

  void remove_rule(std::uint64_t rule_id);

  /// Schedules a failure at `at` (or the next step if `at` is in the past).
  void fail_link(const std::string& a, const std::string& b, tick at);

  void restore_link(const std::string& a, const std::string& b, tick at);

  tick now() const noexcept {
    return now_;
  }

  const topology& topo() const noexcept {
    return topo_;
  }

  const scenario& scen() const noexcept {
    return scen_;
  }

  /// Active rules per switch, ordered by rule_id.
  std::map<std::string, std::vector<flow_rule>> flow_tables() const;

  const std::vector<sim_event>& trace() const noexcept {
    return trace_;
  }

  const std::vector<flow_metrics>& flows() const noexcept {
    return flows_;
  }

  const std::vector<stats_row>& stats() const noexcept {
    return stats_;
  }

  std::uint64_t packets_dropped() const noexcept {
    return dropped_;
  }

  /// Per (src host, dst host): units emitted and units received.
  std::map<std::pair<std::string, std::string>,
           std::pair<std::int64_t, std::int64_t>>
  conservation() const;

private:
  struct packet {
    std::size_t flow = 0;
    std::string at; // switch the packet is entering
    int hops = 0;
  };

  struct transit {
    packet pkt;
    std::string a; // link endpoints, a < b
    std::string b;
  };

  struct rule_op {
    bool install = true;
    flow_rule rule;
  };

  void apply_rule_ops();
  void apply_link_changes(std::vector<sim_event>& out);
  void handle(packet pkt, std::vector<sim_event>& out, bool buffered);
  const flow_rule* lookup(const std::string& sw, const std::string& src,
                          const std::string& dst) const;
  void drop(const std::string* a, const std::string* b);

  topology topo_;
  scenario scen_;
  sim_options opts_;
  tick now_ = 0;
  std::map<std::uint64_t, flow_rule> rules_;
  std::vector<rule_op> pending_ops_;
  std::multimap<tick, std::tuple<std::string, std::string, bool>> link_changes_;
  std::map<std::pair<tick, std::uint64_t>, transit> in_transit_;
  std::uint64_t transit_seq_ = 0;
  std::map<std::tuple<std::string, std::string, std::string>,
           std::deque<packet>> buffers_;
  std::map<std::tuple<std::string, std::string, std::string>, tick> suppressed_;
  std::map<std::pair<std::string, std::string>, std::int64_t> used_;
  std::map<std::pair<std::string, std::string>, link_counter> window_;
  std::vector<flow_metrics> flows_;
  std::vector<sim_event> trace_;
  std::vector<stats_row> stats_;
  std::uint64_t dropped_ = 0;
};

/// Renders stats rows as CSV with header `tick,link_a,link_b,bytes,drops`.
std::string stats_csv(const std::vector<stats_row>& rows);

} // namespace agentnet::netsim
