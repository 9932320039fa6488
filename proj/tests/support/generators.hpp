#pragma once

// Hand-rolled generators and brute-force oracles shared by the unit and
// acceptance suites.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "agentnet/core.hpp"
#include "agentnet/netsim.hpp"
#include "agentnet/registry.hpp"

namespace testgen {

using namespace agentnet;
using rng_t = std::mt19937_64;

inline std::int64_t uniform(rng_t& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>{lo, hi}(rng);
}

inline bool coin(rng_t& rng, double p) {
  return std::bernoulli_distribution{p}(rng);
}

inline std::string switch_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "s%03d", i);
  return buf;
}

inline std::string host_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "h%03d", i);
  return buf;
}

inline function_kind random_kind(rng_t& rng) {
  auto n = std::size(all_function_kinds);
  return all_function_kinds[uniform(rng, 0, static_cast<std::int64_t>(n) - 1)];
}

inline agent_id random_agent(rng_t& rng, std::uint32_t max_instance = 1000) {
  return agent_id::of(random_kind(rng),
                      static_cast<std::uint32_t>(uniform(rng, 0, max_instance)));
}

inline std::string random_topic(rng_t& rng) {
  static const char* segs[] = {"events", "control", "link", "stats", "kp",
                               "packet_in", "a", "b.c", "x_y"};
  std::string name = segs[uniform(rng, 0, 8)];
  auto extra = uniform(rng, 0, 3);
  for (std::int64_t i = 0; i < extra; ++i)
    name += std::string{"."} + segs[uniform(rng, 0, 8)];
  return name;
}

inline message random_message(rng_t& rng, std::size_t max_payload) {
  message m;
  m.msg_id = rng();
  m.src = random_agent(rng, std::numeric_limits<std::uint32_t>::max());
  if (coin(rng, 0.5))
    m.dst = random_agent(rng, std::numeric_limits<std::uint32_t>::max());
  else
    m.dst = topic{random_topic(rng)};
  m.kind = static_cast<message_kind>(uniform(rng, 0, 3));
  if (coin(rng, 0.5))
    m.correlation_id = rng();
  m.sim_time = uniform(rng, std::numeric_limits<tick>::min() / 2,
                       std::numeric_limits<tick>::max() / 2);
  auto len = coin(rng, 0.1) ? 0
                            : uniform(rng, 0, static_cast<std::int64_t>(
                                                std::min<std::size_t>(
                                                  max_payload, 512)));
  m.payload.resize(static_cast<std::size_t>(len));
  for (auto& b : m.payload)
    b = static_cast<std::uint8_t>(rng());
  return m;
}

// -- graphs -------------------------------------------------------------------

/// Connected graph: random spanning tree plus extra edges, one host per
/// switch.
inline netsim::topology random_connected(rng_t& rng, int n, int extra,
                                         tick max_latency,
                                         std::int64_t capacity = 100) {
  netsim::topology topo;
  std::set<std::pair<int, int>> edges;
  for (int i = 1; i < n; ++i) {
    int j = static_cast<int>(uniform(rng, 0, i - 1));
    edges.insert({j, i});
  }
  int attempts = 0;
  while (extra > 0 && attempts++ < 10 * n * n) {
    int a = static_cast<int>(uniform(rng, 0, n - 1));
    int b = static_cast<int>(uniform(rng, 0, n - 1));
    if (a == b)
      continue;
    if (edges.insert({std::min(a, b), std::max(a, b)}).second)
      --extra;
  }
  for (int i = 0; i < n; ++i) {
    topo.switches.push_back(switch_name(i));
    topo.hosts[host_name(i)] = switch_name(i);
  }
  for (auto [a, b] : edges)
    topo.links.push_back({switch_name(a), switch_name(b), capacity,
                          uniform(rng, 1, max_latency), true});
  std::sort(topo.links.begin(), topo.links.end(), [](auto& x, auto& y) {
    return std::tie(x.a, x.b) < std::tie(y.a, y.b);
  });
  return topo;
}

/// Erdos-Renyi graph; may be disconnected. Some links are down.
inline netsim::topology random_graph(rng_t& rng, int n, double p,
                                     tick max_latency, double down = 0.0) {
  netsim::topology topo;
  for (int i = 0; i < n; ++i)
    topo.switches.push_back(switch_name(i));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(rng, p))
        topo.links.push_back({switch_name(i), switch_name(j), 10,
                              uniform(rng, 1, max_latency), !coin(rng, down)});
  return topo;
}

/// Adjacency over up links.
inline std::map<std::string, std::vector<std::pair<std::string, tick>>>
adjacency(const netsim::topology& topo) {
  std::map<std::string, std::vector<std::pair<std::string, tick>>> adj;
  for (auto& s : topo.switches)
    adj[s];
  for (auto& l : topo.links)
    if (l.up) {
      adj[l.a].push_back({l.b, l.latency});
      adj[l.b].push_back({l.a, l.latency});
    }
  return adj;
}

inline bool connected_over_up(const netsim::topology& topo) {
  if (topo.switches.empty())
    return true;
  auto adj = adjacency(topo);
  std::set<std::string> seen{topo.switches.front()};
  std::vector<std::string> stack{topo.switches.front()};
  while (!stack.empty()) {
    auto at = stack.back();
    stack.pop_back();
    for (auto& [n, w] : adj[at])
      if (seen.insert(n).second)
        stack.push_back(n);
  }
  return seen.size() == topo.switches.size();
}

struct best_path {
  std::int64_t cost = std::numeric_limits<std::int64_t>::max();
  std::vector<std::string> nodes;
};

/// Exhaustive enumeration of simple paths from `src`; the minimum-cost path
/// to every reachable switch, ties broken by the smaller node sequence.
inline std::map<std::string, best_path>
all_simple_paths_from(const netsim::topology& topo, const std::string& src) {
  auto adj = adjacency(topo);
  std::map<std::string, best_path> best;
  std::vector<std::string> path{src};
  std::set<std::string> on_path{src};
  std::function<void(std::int64_t)> walk = [&](std::int64_t cost) {
    auto& b = best[path.back()];
    if (cost < b.cost || (cost == b.cost && path < b.nodes)) {
      b.cost = cost;
      b.nodes = path;
    }
    for (auto& [n, w] : adj[path.back()]) {
      if (on_path.count(n))
        continue;
      path.push_back(n);
      on_path.insert(n);
      walk(cost + w);
      on_path.erase(n);
      path.pop_back();
    }
  };
  walk(0);
  return best;
}

/// Floyd-Warshall distances over up links.
inline std::vector<std::vector<std::int64_t>>
all_pairs(const netsim::topology& topo) {
  auto n = topo.switches.size();
  const auto inf = std::numeric_limits<std::int64_t>::max() / 4;
  std::vector<std::vector<std::int64_t>> d(n, std::vector<std::int64_t>(n, inf));
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) {
    index[topo.switches[i]] = i;
    d[i][i] = 0;
  }
  for (auto& l : topo.links)
    if (l.up) {
      auto a = index[l.a];
      auto b = index[l.b];
      d[a][b] = std::min(d[a][b], l.latency);
      d[b][a] = std::min(d[b][a], l.latency);
    }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i][k] >= inf)
        continue;
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j])
          d[i][j] = d[i][k] + d[k][j];
    }
  return d;
}

// -- scenarios ----------------------------------------------------------------

struct scenario_shape {
  int min_switches = 5;
  int max_switches = 20;
  int min_flows = 3;
  int max_flows = 15;
  int max_failures = 2;
  tick flow_window = 60;
  tick first_failure = 90;
  tick failure_spacing = 25;
};

inline netsim::scenario random_scenario(rng_t& rng,
                                        const netsim::topology& topo,
                                        const scenario_shape& shape) {
  netsim::scenario scen;
  scen.seed = rng() | 1;
  std::vector<std::string> hosts;
  for (auto& [h, sw] : topo.hosts)
    hosts.push_back(h);
  auto flows = uniform(rng, shape.min_flows, shape.max_flows);
  static const char* hints[] = {"Bulk", "Interactive", "RealTime"};
  for (std::int64_t i = 0; i < flows; ++i) {
    netsim::flow_spec f;
    f.src = hosts[uniform(rng, 0, static_cast<std::int64_t>(hosts.size()) - 1)];
    do {
      f.dst =
        hosts[uniform(rng, 0, static_cast<std::int64_t>(hosts.size()) - 1)];
    } while (f.dst == f.src);
    f.start_tick = uniform(rng, 1, shape.flow_window);
    f.size = uniform(rng, 5, 80);
    f.interval = uniform(rng, 1, 3);
    f.cls = hints[uniform(rng, 0, 2)];
    scen.flows.push_back(f);
  }
  auto failures = uniform(rng, 0, shape.max_failures);
  tick at = shape.first_failure + uniform(rng, 0, 10);
  for (std::int64_t i = 0; i < failures && !topo.links.empty(); ++i) {
    auto& l = topo.links[uniform(
      rng, 0, static_cast<std::int64_t>(topo.links.size()) - 1)];
    scen.failures.push_back({l.a, l.b, at});
    at += shape.failure_spacing + uniform(rng, 0, 10);
  }
  scen.duration_ticks = at + 40;
  return scen;
}

// -- registry oracle ----------------------------------------------------------

/// Every register/heartbeat/deregister kept as a flat history; queries replay
/// it from scratch.
struct lease_history {
  struct entry {
    int op = 0; // 0 register, 1 heartbeat, 2 deregister
    service_descriptor desc;
    agent_id agent;
    tick at = 0;
  };
  std::vector<entry> log;

  /// Expiry of `agent` at `now` per the history, if a lease was live.
  std::optional<std::pair<service_descriptor, tick>>
  state(const agent_id& agent, tick now) const {
    std::optional<std::pair<service_descriptor, tick>> cur;
    for (auto& e : log) {
      if (e.at > now)
        break;
      if (e.op == 0 && e.desc.agent == agent)
        cur = {e.desc, e.at + e.desc.lease_ttl};
      else if (e.op == 1 && e.agent == agent && cur && cur->second > e.at)
        cur->second = e.at + cur->first.lease_ttl;
      else if (e.op == 2 && e.agent == agent)
        cur.reset();
    }
    return cur;
  }

  std::vector<service_descriptor> discover(function_kind kind,
                                           std::optional<gana_level> level,
                                           tick now) const {
    std::set<agent_id> agents;
    for (auto& e : log)
      agents.insert(e.op == 0 ? e.desc.agent : e.agent);
    std::vector<service_descriptor> out;
    for (auto& a : agents) {
      auto s = state(a, now);
      if (!s || s->second <= now)
        continue;
      auto& d = s->first;
      bool kind_ok = d.capabilities.count(kind) > 0 || d.agent.kind == kind;
      if (kind_ok && (!level || d.agent.level == *level))
        out.push_back(d);
    }
    std::stable_sort(out.begin(), out.end(), [](auto& x, auto& y) {
      return x.agent.instance < y.agent.instance;
    });
    return out;
  }
};

} // namespace testgen
