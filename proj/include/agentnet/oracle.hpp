#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agentnet/control.hpp"
#include "agentnet/event_plane.hpp"
#include "agentnet/netsim.hpp"
#include "agentnet/orchestrator.hpp"
#include "agentnet/plan.hpp"
#include "agentnet/pps.hpp"

namespace agentnet {

/// Everything needed to run one scenario in either mode.
struct run_config {
  netsim::topology topo;
  netsim::scenario scen;
  std::vector<std::string> chain{"Session", "Classifier", "QoS", "Monitoring"};
  std::vector<orchestration::compute_node> nodes{{"node-0", 64, 64, {}}};
  std::map<function_kind, orchestration::demand> demands;
  control::classifier_config classifier;
  control::qos_config qos;
  distribution_strategy strategy = distribution_strategy::centralized;
  std::vector<pps::stack_profile> profiles = pps::default_profiles();
  /// Pre-install rules for the declared flows before they start.
  bool proactive = false;
  std::vector<policy> policies;
  netsim::sim_options sim;
  tick heartbeat_interval = 10;
  /// Ticks allowed after the scenario ends for control traffic to settle.
  tick drain_limit = 2000;
};

struct run_metrics {
  std::int64_t flows = 0;
  std::int64_t flows_completed = 0;
  std::uint64_t packets_dropped = 0;
  /// Ticks from flow start to first forwarded packet, over flows that got one.
  double mean_setup_latency = 0.0;
  std::int64_t flows_set_up = 0;
  tick ticks = 0;
};

/// Final flow tables with canonical rule ids, the session ledger and metrics.
struct run_outcome {
  std::map<std::string, std::vector<netsim::flow_rule>> tables;
  std::vector<control::session> sessions;
  run_metrics metrics;
  /// Per-link counters from the simulator; not part of the comparison.
  std::vector<netsim::stats_row> stats;

  datum to_datum() const;
};

/// Relabels rule ids 1..n in (switch, match, priority) order and maps the
/// session ledger onto the new ids.
run_outcome normalize(const std::map<std::string, std::vector<netsim::flow_rule>>&
                        tables,
                      std::vector<control::session> sessions,
                      run_metrics metrics);

run_metrics measure(const netsim::simulator& sim);

/// Monolithic controller: the same control logic as direct calls.
run_outcome run_monolithic(const run_config& cfg,
                           std::vector<std::string>* log = nullptr);

struct diff_entry {
  std::string what; // "rule" or "session"
  std::string side; // "only_a", "only_b" or "differs"
  datum a;
  datum b;
};

struct diff_report {
  std::vector<diff_entry> entries;
  run_metrics a;
  run_metrics b;

  bool empty() const noexcept {
    return entries.empty();
  }
  datum to_datum() const;
  std::string to_text() const;
};

/// Rules are compared by content; sessions by their normalized ledger entry.
/// Metrics are reported but never make a diff non-empty.
diff_report compare(const run_outcome& a, const run_outcome& b);

datum to_datum(const run_metrics& m);

// -- configuration files ------------------------------------------------------

struct config_file {
  run_config run;
  std::string mode = "agents";
  std::optional<std::uint64_t> seed;
};

/// Reads a run configuration. Relative paths resolve against the file's
/// directory.
config_file load_config_file(const std::filesystem::path& path);
config_file load_config(const datum& document,
                        const std::filesystem::path& base_dir);

} // namespace agentnet
