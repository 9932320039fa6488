#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "agentnet/oracle.hpp"
#include "agentnet/runtime.hpp"

namespace agentnet {

/// Crash the live agent of `kind` with the lowest instance at the first
/// quiescent tick at or after `at`.
struct kill_spec {
  function_kind kind = function_kind::routing;
  tick at = 0;
  /// A specific instance instead of the lowest live one.
  std::optional<std::uint32_t> instance;
};

struct recovery_record {
  agent_id killed;
  tick killed_at = 0;
  std::optional<agent_id> replacement;
  std::optional<tick> registered_at;
  /// The orchestrator gave up, e.g. no node had room for a replacement.
  bool failed = false;
};

struct agents_options {
  std::vector<kill_spec> kills;
  std::function<bool(const message&)> duplicate;
  std::function<bool(const message&)> drop;
  bool keep_stage_log = true;
};

struct agents_run {
  run_outcome outcome;
  std::vector<stage_record> stage_log;
  /// Line-oriented JSON: run events, then every stage record.
  std::vector<std::string> log;
  std::vector<recovery_record> recoveries;
  std::vector<netsim::stats_row> stats;
  /// Violation events observed on the bus (diagnostics of failed plans).
  std::size_t violation_events = 0;
  /// Largest number of rules any switch held at any tick.
  std::size_t max_rules_per_switch = 0;
  bool settled = true;
};

/// Runs the scenario with the controller decomposed into agents on the
/// runtime, with the switches of `cfg.topo` bridged through adapters.
agents_run run_agents(const run_config& cfg, const agents_options& opts = {});

} // namespace agentnet
