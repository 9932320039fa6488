#include "agentnet/control.hpp"

#include <algorithm>
#include <limits>
#include <queue>

#include "agentnet/error.hpp"
#include "agentnet/facts.hpp"

namespace agentnet::control {

namespace {

std::string link_key(const std::string& a, const std::string& b) {
  return a < b ? a + "|" + b : b + "|" + a;
}

} // namespace

// -- classification -----------------------------------------------------------

std::string_view to_string(flow_class c) noexcept {
  switch (c) {
    case flow_class::bulk: return "Bulk";
    case flow_class::interactive: return "Interactive";
    case flow_class::realtime: return "RealTime";
  }
  return "?";
}

std::optional<flow_class> parse_flow_class(std::string_view name) noexcept {
  for (auto c : {flow_class::bulk, flow_class::interactive, flow_class::realtime})
    if (to_string(c) == name)
      return c;
  return std::nullopt;
}

flow_class classify_flow(const flow_features& f,
                         const classifier_config& cfg) noexcept {
  if (f.size > cfg.size_threshold)
    return flow_class::bulk;
  if (f.interarrival < cfg.interarrival_threshold)
    return flow_class::realtime;
  return flow_class::interactive;
}

flow_class class_from_hint(const std::string& hint) noexcept {
  return parse_flow_class(hint).value_or(flow_class::interactive);
}

// -- routing ------------------------------------------------------------------

path_result compute_path(const netsim::topology& view, const std::string& src,
                         const std::string& dst) {
  for (auto* id : {&src, &dst})
    if (!view.has_switch(*id))
      throw error{errc::unknown_node, *id};
  constexpr auto inf = std::numeric_limits<std::int64_t>::max();
  // Switches are kept sorted, so indices follow name order.
  auto& names = view.switches;
  auto index = [&](const std::string& sw) {
    return static_cast<std::size_t>(
      std::lower_bound(names.begin(), names.end(), sw) - names.begin());
  };
  auto n = names.size();
  std::vector<std::vector<std::pair<std::size_t, std::int64_t>>> adj(n);
  std::size_t a = 0;
  const std::string* last = nullptr;
  for (auto& l : view.links) {
    if (!l.up)
      continue;
    if (!last || *last != l.a) {
      a = index(l.a);
      last = &l.a;
    }
    auto b = index(l.b);
    adj[a].emplace_back(b, l.latency);
    adj[b].emplace_back(a, l.latency);
  }
  for (auto& next : adj)
    std::sort(next.begin(), next.end());
  // Distances to dst, then a walk from src that always takes the smallest
  // neighbor still on a shortest path.
  std::vector<std::int64_t> dist(n, inf);
  using item = std::pair<std::int64_t, std::size_t>;
  std::priority_queue<item, std::vector<item>, std::greater<>> frontier;
  auto s = index(src);
  auto t = index(dst);
  dist[t] = 0;
  frontier.emplace(0, t);
  while (!frontier.empty()) {
    auto [d, u] = frontier.top();
    frontier.pop();
    if (d > dist[u])
      continue;
    for (auto [v, w] : adj[u]) {
      if (d + w < dist[v]) {
        dist[v] = d + w;
        frontier.emplace(dist[v], v);
      }
    }
  }
  if (dist[s] == inf)
    throw error{errc::no_path, src + " -> " + dst};
  path_result out;
  out.cost = dist[s];
  out.nodes.push_back(src);
  auto at = s;
  while (at != t) {
    for (auto [v, w] : adj[at]) {
      if (dist[v] != inf && dist[v] + w == dist[at]) {
        at = v;
        break;
      }
    }
    out.nodes.push_back(names[at]);
  }
  return out;
}

std::vector<std::pair<std::string, std::string>>
path_links(const std::vector<std::string>& nodes) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    out.push_back(std::minmax(nodes[i], nodes[i + 1]));
  return out;
}

bool path_uses(const std::vector<std::string>& nodes, const std::string& a,
               const std::string& b) {
  std::pair<std::string, std::string> key = std::minmax(a, b);
  for (auto& l : path_links(nodes))
    if (l == key)
      return true;
  return false;
}

std::vector<netsim::flow_rule> rules_for_path(const path_result& path,
                                              const std::string& src_host,
                                              const std::string& dst_host,
                                              int priority) {
  std::vector<netsim::flow_rule> out;
  for (std::size_t i = 0; i < path.nodes.size(); ++i) {
    netsim::flow_rule r;
    r.sw = path.nodes[i];
    r.match = {false, src_host, dst_host};
    r.forward = i + 1 < path.nodes.size() ? path.nodes[i + 1] : dst_host;
    r.priority = priority;
    out.push_back(std::move(r));
  }
  return out;
}

// -- admission ----------------------------------------------------------------

bool qos_book::admit(std::uint64_t session, flow_class cls,
                     const std::vector<std::string>& nodes,
                     const netsim::topology& topo) {
  if (cls != flow_class::realtime)
    return true;
  std::vector<std::string> keys;
  for (auto& [a, b] : path_links(nodes)) {
    auto* l = topo.find_link(a, b);
    if (!l)
      return false;
    auto key = link_key(a, b);
    auto have = reserved_.count(key) ? reserved_.at(key) : 0;
    if (auto h = holds_.find(session); h != holds_.end()
        && std::count(h->second.begin(), h->second.end(), key))
      have -= demand_.at(session);
    if ((have + cfg_.realtime_demand) * 100 > cfg_.cap_percent * l->capacity)
      return false;
    keys.push_back(key);
  }
  release(session);
  for (auto& k : keys)
    reserved_[k] += cfg_.realtime_demand;
  holds_[session] = std::move(keys);
  demand_[session] = cfg_.realtime_demand;
  return true;
}

void qos_book::release(std::uint64_t session) {
  auto h = holds_.find(session);
  if (h == holds_.end())
    return;
  for (auto& k : h->second)
    if ((reserved_[k] -= demand_[session]) == 0)
      reserved_.erase(k);
  holds_.erase(h);
  demand_.erase(session);
}

std::int64_t qos_book::reserved(const std::string& a,
                                const std::string& b) const {
  auto i = reserved_.find(link_key(a, b));
  return i == reserved_.end() ? 0 : i->second;
}

datum qos_book::to_datum() const {
  datum holds = datum::object();
  for (auto& [id, keys] : holds_)
    holds[std::to_string(id)] = {{"links", keys}, {"demand", demand_.at(id)}};
  return datum{{"reserved", reserved_}, {"holds", holds}};
}

qos_book qos_book::from_datum(const datum& value, qos_config cfg) {
  qos_book book{cfg};
  book.reserved_ = value.at("reserved").get<std::map<std::string, std::int64_t>>();
  for (auto& [id, h] : value.at("holds").items()) {
    auto sid = std::stoull(id);
    book.holds_[sid] = h.at("links").get<std::vector<std::string>>();
    book.demand_[sid] = h.at("demand").get<std::int64_t>();
  }
  return book;
}

// -- sessions -----------------------------------------------------------------

std::string_view to_string(session_state s) noexcept {
  switch (s) {
    case session_state::active: return "Active";
    case session_state::updating: return "Updating";
    case session_state::removed: return "Removed";
  }
  return "?";
}

datum to_datum(const session& s) {
  return datum{{"session_id", s.id},
               {"src", s.src},
               {"dst", s.dst},
               {"class", std::string{to_string(s.cls)}},
               {"state", std::string{to_string(s.state)}},
               {"reason", s.reason},
               {"path", s.path},
               {"rule_ids", s.rule_ids}};
}

session session_from(const datum& value) {
  session s;
  s.id = value.at("session_id").get<std::uint64_t>();
  s.src = value.at("src").get<std::string>();
  s.dst = value.at("dst").get<std::string>();
  s.cls = class_from_hint(value.at("class").get<std::string>());
  auto st = value.at("state").get<std::string>();
  s.state = st == "Active"    ? session_state::active
            : st == "Removed" ? session_state::removed
                              : session_state::updating;
  s.reason = value.value("reason", std::string{});
  s.path = value.value("path", std::vector<std::string>{});
  s.rule_ids = value.value("rule_ids", std::vector<std::uint64_t>{});
  return s;
}

// -- forwarding ---------------------------------------------------------------

datum forwarding_state::tables() const {
  datum out = datum::object();
  for (auto& [id, r] : rules)
    out[r.sw].push_back(id);
  return out;
}

datum forwarding_state::rules_datum() const {
  datum out = datum::array();
  for (auto& [id, r] : rules)
    out.push_back(netsim::to_datum(r));
  return out;
}

forwarding_state forwarding_state::from(const datum& rules, std::uint64_t next) {
  forwarding_state st;
  for (auto& r : rules) {
    auto rule = netsim::flow_rule_from(r);
    st.rules.emplace(rule.rule_id, std::move(rule));
  }
  st.next_rule_id = next;
  return st;
}

std::vector<netsim::flow_rule>
forwarding_state::assign_ids(std::vector<netsim::flow_rule> r) {
  for (auto& rule : r)
    rule.rule_id = next_rule_id++;
  return r;
}

void forwarding_state::apply(const std::vector<std::uint64_t>& remove,
                             const std::vector<netsim::flow_rule>& install) {
  for (auto id : remove)
    rules.erase(id);
  for (auto& r : install)
    rules.insert_or_assign(r.rule_id, r);
}

plan forwarding_plan(const forwarding_state& fwd,
                     const std::vector<std::uint64_t>& remove,
                     const std::vector<netsim::flow_rule>& install,
                     const adapter_lookup& adapter_of) {
  plan p;
  auto via = [&](datum params, const std::string& sw) {
    if (adapter_of)
      if (auto a = adapter_of(sw))
        params["via"] = to_string(*a);
    return params;
  };
  for (auto id : remove) {
    auto r = fwd.rules.find(id);
    if (r == fwd.rules.end())
      continue;
    p.steps.push_back({"remove_rule", switch_ref{r->second.sw},
                       via(datum{{"rule_id", id}}, r->second.sw)});
  }
  for (auto& r : install)
    p.steps.push_back({"install_rule", switch_ref{r.sw},
                       via(datum{{"rule", netsim::to_datum(r)}}, r.sw)});
  return p;
}

// -- direct controller --------------------------------------------------------

controller::controller(netsim::topology topo, controller_config cfg)
  : topo_(std::move(topo)), cfg_(std::move(cfg)), qos_(cfg_.qos) {
}

session& controller::open(const std::string& src, const std::string& dst,
                          flow_class cls) {
  seen_pairs_.emplace(src, dst);
  session s;
  s.id = next_session_++;
  s.src = src;
  s.dst = dst;
  s.cls = cls;
  return sessions_.emplace(s.id, std::move(s)).first->second;
}

void controller::settle(session& s, bool reroute) {
  auto old_rules = reroute ? s.rule_ids : std::vector<std::uint64_t>{};
  std::string outcome;
  path_result path;
  try {
    path = compute_path(topo_, topo_.hosts.at(s.src), topo_.hosts.at(s.dst));
  } catch (const error& ex) {
    if (ex.code() != errc::no_path)
      throw;
    outcome = reroute ? "unroutable" : "no-path";
  }
  if (cfg_.use_qos) {
    if (reroute)
      qos_.release(s.id);
    if (outcome.empty() && !qos_.admit(s.id, s.cls, path.nodes, topo_))
      outcome = "qos-denied";
  }
  std::vector<netsim::flow_rule> install;
  auto trial = fwd_;
  if (outcome.empty())
    install = trial.assign_ids(rules_for_path(path, s.src, s.dst));
  auto passes = [&](const plan& p) {
    if (p.empty())
      return true;
    facts_store facts;
    facts.write("topology", topo_.to_datum(), 0);
    facts.write("tables", fwd_.tables(), 0);
    return validate_plan(p, facts, cfg_.policies).passed;
  };
  if (!passes(forwarding_plan(fwd_, old_rules, install))) {
    outcome = "policy";
    install.clear();
    if (cfg_.use_qos)
      qos_.release(s.id);
    if (!passes(forwarding_plan(fwd_, old_rules, {})))
      old_rules.clear();
  } else if (!install.empty()) {
    fwd_.next_rule_id = trial.next_rule_id;
  }
  std::vector<std::uint64_t> removed;
  for (auto id : old_rules)
    if (fwd_.rules.count(id))
      removed.push_back(id);
  fwd_.apply(removed, install);
  pending_.removed.insert(pending_.removed.end(), removed.begin(),
                          removed.end());
  pending_.installed.insert(pending_.installed.end(), install.begin(),
                            install.end());
  s.rule_ids.clear();
  if (outcome.empty()) {
    s.state = session_state::active;
    s.reason.clear();
    s.path = path.nodes;
    for (auto& r : install)
      s.rule_ids.push_back(r.rule_id);
  } else {
    s.state = session_state::removed;
    s.reason = outcome;
    s.path.clear();
    if (outcome == "no-path" || outcome == "unroutable")
      escalations_.push_back({{"issue", outcome}, {"session", s.id}});
  }
}

const session& controller::create_session(const std::string& src,
                                          const std::string& dst,
                                          flow_class cls) {
  for (auto* h : {&src, &dst})
    if (!topo_.has_host(*h))
      throw error{errc::unknown_host, *h};
  auto& s = open(src, dst, cls);
  settle(s, false);
  if (s.reason == "no-path")
    throw error{errc::no_path, src + " -> " + dst};
  return s;
}

const session& controller::update_session(std::uint64_t id, flow_class cls) {
  auto& s = sessions_.at(id);
  s.cls = cls;
  s.state = session_state::updating;
  settle(s, true);
  return s;
}

void controller::remove_session(std::uint64_t id) {
  auto& s = sessions_.at(id);
  if (cfg_.use_qos)
    qos_.release(id);
  fwd_.apply(s.rule_ids, {});
  pending_.removed.insert(pending_.removed.end(), s.rule_ids.begin(),
                          s.rule_ids.end());
  s.rule_ids.clear();
  s.path.clear();
  s.state = session_state::removed;
  s.reason = "removed";
}

void controller::on_packet_in(const netsim::packet_in& ev) {
  if (seen_pairs_.count({ev.src, ev.dst}))
    return;
  flow_features f{ev.size, ev.interval, ev.cls};
  auto cls = cfg_.use_classifier ? classify_flow(f, cfg_.classifier)
                                 : class_from_hint(ev.cls);
  settle(open(ev.src, ev.dst, cls), false);
}

void controller::prepare(const netsim::flow_spec& flow) {
  if (seen_pairs_.count({flow.src, flow.dst}))
    return;
  flow_features f{flow.size, flow.interval, flow.cls};
  settle(open(flow.src, flow.dst, classify_flow(f, cfg_.classifier)), false);
}

std::vector<std::uint64_t> controller::on_link_down(const std::string& a,
                                                    const std::string& b) {
  if (auto* l = topo_.find_link(a, b))
    l->up = false;
  std::vector<std::uint64_t> touched;
  for (auto& [id, s] : sessions_) {
    if (s.state != session_state::active || !path_uses(s.path, a, b))
      continue;
    touched.push_back(id);
    settle(s, true);
  }
  return touched;
}

void controller::on_link_up(const std::string& a, const std::string& b) {
  if (auto* l = topo_.find_link(a, b))
    l->up = true;
}

southbound controller::take_southbound() {
  return std::exchange(pending_, {});
}

} // namespace agentnet::control
