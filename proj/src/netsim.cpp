#include "agentnet/netsim.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "agentnet/error.hpp"

namespace agentnet::netsim {

namespace {

datum read_json_file(const std::filesystem::path& path) {
  std::ifstream in{path};
  if (!in)
    throw error{errc::file_error, "cannot open " + path.string()};
  auto doc = datum::parse(in, nullptr, false);
  if (doc.is_discarded())
    throw error{errc::schema_error, path.string() + " is not valid JSON"};
  return doc;
}

template <class T>
T field(const datum& obj, const char* key) {
  auto i = obj.find(key);
  if (i == obj.end())
    throw error{errc::schema_error, std::string{"missing field '"} + key + "'"};
  try {
    return i->template get<T>();
  } catch (const datum::exception&) {
    throw error{errc::schema_error,
                std::string{"field '"} + key + "' has the wrong type"};
  }
}

std::pair<std::string, std::string> ordered(const std::string& x,
                                            const std::string& y) {
  return x < y ? std::pair{x, y} : std::pair{y, x};
}

} // namespace

// -- topology -----------------------------------------------------------------

bool topology::has_switch(const std::string& id) const {
  return std::binary_search(switches.begin(), switches.end(), id);
}

bool topology::has_host(const std::string& id) const {
  return hosts.count(id) > 0;
}

const link* topology::find_link(const std::string& x,
                                const std::string& y) const {
  auto [a, b] = ordered(x, y);
  auto it = std::lower_bound(links.begin(), links.end(), std::pair{a, b},
                             [](const link& l, const auto& key) {
                               return std::tie(l.a, l.b)
                                      < std::tie(key.first, key.second);
                             });
  if (it != links.end() && it->a == a && it->b == b)
    return &*it;
  return nullptr;
}

link* topology::find_link(const std::string& x, const std::string& y) {
  return const_cast<link*>(std::as_const(*this).find_link(x, y));
}

std::vector<std::pair<std::string, const link*>>
topology::up_neighbors(const std::string& sw) const {
  std::vector<std::pair<std::string, const link*>> out;
  for (auto& l : links) {
    if (!l.up)
      continue;
    if (l.a == sw)
      out.emplace_back(l.b, &l);
    else if (l.b == sw)
      out.emplace_back(l.a, &l);
  }
  std::sort(out.begin(), out.end(),
            [](auto& x, auto& y) { return x.first < y.first; });
  return out;
}

datum topology::to_datum() const {
  datum ls = datum::array();
  for (auto& l : links)
    ls.push_back({{"a", l.a},
                  {"b", l.b},
                  {"capacity", l.capacity},
                  {"latency", l.latency},
                  {"up", l.up}});
  return datum{{"switches", switches}, {"hosts", hosts}, {"links", ls}};
}

topology load_topology(const datum& document) {
  if (!document.is_object())
    throw error{errc::schema_error, "topology must be a JSON object"};
  topology topo;
  topo.switches = field<std::vector<std::string>>(document, "switches");
  std::sort(topo.switches.begin(), topo.switches.end());
  if (std::adjacent_find(topo.switches.begin(), topo.switches.end())
      != topo.switches.end())
    throw error{errc::schema_error, "duplicate switch id"};
  if (document.contains("hosts"))
    topo.hosts = field<std::map<std::string, std::string>>(document, "hosts");
  for (auto& [host, sw] : topo.hosts) {
    if (topo.has_switch(host))
      throw error{errc::schema_error, "host id " + host + " names a switch"};
    if (!topo.has_switch(sw))
      throw error{errc::dangling_reference,
                  "host " + host + " attaches to unknown switch " + sw};
  }
  auto raw = document.find("links");
  if (raw == document.end() || !raw->is_array())
    throw error{errc::schema_error, "missing field 'links'"};
  std::set<std::pair<std::string, std::string>> seen;
  for (auto& item : *raw) {
    if (!item.is_object())
      throw error{errc::schema_error, "link must be an object"};
    auto a = field<std::string>(item, "a");
    auto b = field<std::string>(item, "b");
    for (auto* end : {&a, &b})
      if (!topo.has_switch(*end))
        throw error{errc::dangling_reference,
                    "link references unknown switch " + *end};
    if (a == b)
      throw error{errc::self_loop, "link " + a + "-" + b};
    link l;
    std::tie(l.a, l.b) = ordered(a, b);
    if (!seen.insert({l.a, l.b}).second)
      throw error{errc::schema_error, "duplicate link " + l.a + "-" + l.b};
    l.capacity = field<std::int64_t>(item, "capacity");
    l.latency = field<tick>(item, "latency");
    if (l.capacity <= 0 || l.latency < 1)
      throw error{errc::schema_error,
                  "link " + l.a + "-" + l.b
                    + " needs capacity > 0 and latency >= 1"};
    if (item.contains("up"))
      l.up = field<bool>(item, "up");
    topo.links.push_back(std::move(l));
  }
  std::sort(topo.links.begin(), topo.links.end(), [](auto& x, auto& y) {
    return std::tie(x.a, x.b) < std::tie(y.a, y.b);
  });
  return topo;
}

topology load_topology_file(const std::filesystem::path& path) {
  return load_topology(read_json_file(path));
}

// -- rules --------------------------------------------------------------------

datum to_datum(const flow_rule& rule) {
  datum match = rule.match.wildcard
                  ? datum("*")
                  : datum{{"src", rule.match.src}, {"dst", rule.match.dst}};
  datum action = rule.forward ? datum{{"forward", *rule.forward}}
                              : datum{{"drop", true}};
  return datum{{"switch", rule.sw},
               {"match", match},
               {"action", action},
               {"priority", rule.priority},
               {"rule_id", rule.rule_id}};
}

flow_rule flow_rule_from(const datum& value) {
  flow_rule rule;
  rule.sw = field<std::string>(value, "switch");
  auto& match = value.at("match");
  if (match.is_string() && match == "*") {
    rule.match.wildcard = true;
  } else {
    rule.match.src = field<std::string>(match, "src");
    rule.match.dst = field<std::string>(match, "dst");
  }
  auto& action = value.at("action");
  if (action.contains("forward"))
    rule.forward = field<std::string>(action, "forward");
  rule.priority = field<int>(value, "priority");
  rule.rule_id = field<std::uint64_t>(value, "rule_id");
  return rule;
}

// -- scenarios ----------------------------------------------------------------

datum scenario::to_datum() const {
  datum fs = datum::array();
  for (auto& f : flows)
    fs.push_back({{"src", f.src},
                  {"dst", f.dst},
                  {"start_tick", f.start_tick},
                  {"size", f.size},
                  {"class", f.cls},
                  {"interval", f.interval}});
  datum xs = datum::array();
  for (auto& x : failures)
    xs.push_back({{"a", x.a}, {"b", x.b}, {"at", x.at}});
  return datum{{"seed", seed},
               {"duration_ticks", duration_ticks},
               {"jitter", jitter},
               {"flows", fs},
               {"failures", xs}};
}

scenario load_scenario(const datum& document) {
  if (!document.is_object())
    throw error{errc::schema_error, "scenario must be a JSON object"};
  scenario scen;
  scen.seed = field<std::uint64_t>(document, "seed");
  scen.duration_ticks = field<tick>(document, "duration_ticks");
  if (scen.duration_ticks < 0)
    throw error{errc::schema_error, "duration_ticks must be >= 0"};
  if (document.contains("jitter"))
    scen.jitter = field<tick>(document, "jitter");
  if (scen.jitter < 0)
    throw error{errc::schema_error, "jitter must be >= 0"};
  for (auto& item : document.value("flows", datum::array())) {
    flow_spec f;
    f.src = field<std::string>(item, "src");
    f.dst = field<std::string>(item, "dst");
    f.start_tick = field<tick>(item, "start_tick");
    f.size = field<std::int64_t>(item, "size");
    if (item.contains("class"))
      f.cls = field<std::string>(item, "class");
    if (item.contains("interval"))
      f.interval = field<tick>(item, "interval");
    if (f.size <= 0 || f.interval < 1 || f.start_tick < 0)
      throw error{errc::schema_error, "flow needs size > 0, interval >= 1"};
    scen.flows.push_back(std::move(f));
  }
  for (auto& item : document.value("failures", datum::array()))
    scen.failures.push_back(failure_spec{field<std::string>(item, "a"),
                                         field<std::string>(item, "b"),
                                         field<tick>(item, "at")});
  return scen;
}

scenario load_scenario_file(const std::filesystem::path& path) {
  return load_scenario(read_json_file(path));
}

// -- events -------------------------------------------------------------------

datum to_datum(const sim_event& ev) {
  return std::visit(
    [&](auto& body) -> datum {
      using T = std::decay_t<decltype(body)>;
      if constexpr (std::is_same_v<T, packet_in>) {
        return {{"type", "PacketIn"}, {"at", ev.at},    {"switch", body.sw},
                {"src", body.src},    {"dst", body.dst}, {"flow", body.flow},
                {"size", body.size},  {"class", body.cls},
                {"interval", body.interval}};
      } else if constexpr (std::is_same_v<T, link_down>) {
        return {{"type", "LinkDown"}, {"at", ev.at}, {"a", body.a},
                {"b", body.b}};
      } else if constexpr (std::is_same_v<T, link_up>) {
        return {{"type", "LinkUp"}, {"at", ev.at}, {"a", body.a},
                {"b", body.b}};
      } else {
        datum links = datum::array();
        for (auto& c : body.links)
          links.push_back({{"a", c.a},
                           {"b", c.b},
                           {"bytes", c.bytes},
                           {"drops", c.drops}});
        return {{"type", "StatsTick"}, {"at", ev.at}, {"links", links}};
      }
    },
    ev.body);
}

std::string to_string(const sim_event& ev) {
  return to_datum(ev).dump();
}

// -- simulator ----------------------------------------------------------------

simulator::simulator(topology topo, scenario scen, sim_options options)
  : topo_(std::move(topo)), scen_(std::move(scen)), opts_(options) {
  xorshift64 rng{scen_.seed};
  for (auto& f : scen_.flows) {
    for (auto* h : {&f.src, &f.dst})
      if (!topo_.has_host(*h))
        throw error{errc::unknown_host, *h};
    flow_metrics m;
    m.start = f.start_tick
              + static_cast<tick>(
                rng.below(static_cast<std::uint64_t>(scen_.jitter) + 1));
    flows_.push_back(m);
  }
  if (opts_.apply_scenario_failures)
    for (auto& x : scen_.failures)
      fail_link(x.a, x.b, x.at);
  for (auto& l : topo_.links)
    window_[{l.a, l.b}] = link_counter{l.a, l.b, 0, 0};
}

void simulator::install_rule(const flow_rule& rule) {
  if (!topo_.has_switch(rule.sw))
    throw error{errc::unknown_switch, rule.sw};
  if (rule.priority < 0)
    throw error{errc::schema_error, "priority must be >= 0"};
  if (rule.forward) {
    auto& next = *rule.forward;
    auto host = topo_.hosts.find(next);
    bool adjacent = host != topo_.hosts.end() ? host->second == rule.sw
                                              : topo_.find_link(rule.sw, next)
                                                  != nullptr;
    if (!adjacent)
      throw error{errc::non_adjacent_action, rule.sw + " -> " + next};
  }
  pending_ops_.push_back({true, rule});
}

void simulator::remove_rule(std::uint64_t rule_id) {
  flow_rule r;
  r.rule_id = rule_id;
  pending_ops_.push_back({false, r});
}

void simulator::fail_link(const std::string& a, const std::string& b,
                          tick at) {
  if (!topo_.find_link(a, b))
    throw error{errc::unknown_link, a + "-" + b};
  auto [x, y] = ordered(a, b);
  link_changes_.emplace(std::max(at, now_), std::tuple{x, y, false});
}

void simulator::restore_link(const std::string& a, const std::string& b,
                             tick at) {
  if (!topo_.find_link(a, b))
    throw error{errc::unknown_link, a + "-" + b};
  auto [x, y] = ordered(a, b);
  link_changes_.emplace(std::max(at, now_), std::tuple{x, y, true});
}

std::map<std::string, std::vector<flow_rule>> simulator::flow_tables() const {
  std::map<std::string, std::vector<flow_rule>> out;
  for (auto& [id, rule] : rules_)
    out[rule.sw].push_back(rule);
  return out;
}

void simulator::apply_rule_ops() {
  for (auto& op : pending_ops_) {
    if (!op.install) {
      rules_.erase(op.rule.rule_id);
      continue;
    }
    rules_.insert_or_assign(op.rule.rule_id, op.rule);
    for (auto it = suppressed_.begin(); it != suppressed_.end();) {
      auto& [sw, src, dst] = it->first;
      if (sw == op.rule.sw && op.rule.match.covers(src, dst))
        it = suppressed_.erase(it);
      else
        ++it;
    }
  }
  pending_ops_.clear();
}

void simulator::apply_link_changes(std::vector<sim_event>& out) {
  auto [first, last] = link_changes_.equal_range(now_);
  for (auto it = first; it != last; ++it) {
    auto& [a, b, up] = it->second;
    auto* l = topo_.find_link(a, b);
    if (l->up == up)
      continue;
    l->up = up;
    if (up) {
      out.push_back({now_, link_up{a, b}});
      continue;
    }
    out.push_back({now_, link_down{a, b}});
    for (auto t = in_transit_.begin(); t != in_transit_.end();) {
      if (t->second.a == a && t->second.b == b) {
        drop(&a, &b);
        t = in_transit_.erase(t);
      } else {
        ++t;
      }
    }
  }
  link_changes_.erase(first, last);
}

const flow_rule* simulator::lookup(const std::string& sw,
                                   const std::string& src,
                                   const std::string& dst) const {
  const flow_rule* best = nullptr;
  for (auto& [id, rule] : rules_) {
    if (rule.sw != sw || !rule.match.covers(src, dst))
      continue;
    // rules_ iterates by ascending rule_id, so strict > keeps the lowest id
    if (!best || rule.priority > best->priority)
      best = &rule;
  }
  return best;
}

void simulator::drop(const std::string* a, const std::string* b) {
  ++dropped_;
  if (a && b)
    window_[{*a, *b}].drops += 1;
}

void simulator::handle(packet pkt, std::vector<sim_event>& out,
                       bool buffered) {
  auto& spec = scen_.flows[pkt.flow];
  auto& metrics = flows_[pkt.flow];
  if (pkt.hops++ > opts_.max_hops) {
    drop(nullptr, nullptr);
    return;
  }
  auto* rule = lookup(pkt.at, spec.src, spec.dst);
  if (!rule) {
    auto key = std::tuple{pkt.at, spec.src, spec.dst};
    auto sup = suppressed_.find(key);
    if (sup == suppressed_.end()
        || now_ - sup->second >= opts_.packet_in_suppression) {
      suppressed_[key] = now_;
      out.push_back({now_, packet_in{pkt.at, spec.src, spec.dst, pkt.flow,
                                     spec.size, spec.cls, spec.interval}});
    }
    auto& buf = buffers_[key];
    if (buf.size() >= opts_.buffer_limit) {
      drop(nullptr, nullptr);
      return;
    }
    if (buffered)
      buf.push_front(std::move(pkt));
    else
      buf.push_back(std::move(pkt));
    return;
  }
  if (!rule->forward) {
    drop(nullptr, nullptr);
    return;
  }
  auto& next = *rule->forward;
  if (pkt.at == topo_.hosts.at(spec.src) && !metrics.first_forward)
    metrics.first_forward = now_;
  if (auto host = topo_.hosts.find(next); host != topo_.hosts.end()) {
    if (next == spec.dst)
      metrics.delivered += 1;
    else
      drop(nullptr, nullptr);
    return;
  }
  auto* l = topo_.find_link(pkt.at, next);
  if (!l->up) {
    drop(&l->a, &l->b);
    return;
  }
  auto& used = used_[{l->a, l->b}];
  if (used + 1 > l->capacity) {
    drop(&l->a, &l->b);
    return;
  }
  used += 1;
  window_[{l->a, l->b}].bytes += 1;
  pkt.at = next;
  in_transit_.emplace(std::pair{now_ + l->latency, transit_seq_++},
                      transit{std::move(pkt), l->a, l->b});
}

std::vector<sim_event> simulator::step() {
  std::vector<sim_event> out;
  used_.clear();
  apply_rule_ops();
  apply_link_changes(out);
  // held packets first: they are older than anything arriving now
  auto held = std::exchange(buffers_, {});
  for (auto& [key, queue] : held) {
    for (auto& pkt : queue) {
      auto& spec = scen_.flows[pkt.flow];
      if (lookup(pkt.at, spec.src, spec.dst)) {
        handle(std::move(pkt), out, true);
      } else {
        // still missing: keep order, possibly re-raise after suppression
        auto sup = suppressed_.find(key);
        if (sup == suppressed_.end()
            || now_ - sup->second >= opts_.packet_in_suppression) {
          suppressed_[key] = now_;
          out.push_back({now_, packet_in{pkt.at, spec.src, spec.dst,
                                         pkt.flow, spec.size, spec.cls,
                                         spec.interval}});
        }
        buffers_[key].push_back(std::move(pkt));
      }
    }
  }
  while (!in_transit_.empty() && in_transit_.begin()->first.first <= now_) {
    auto node = in_transit_.extract(in_transit_.begin());
    handle(std::move(node.mapped().pkt), out, false);
  }
  for (std::size_t i = 0; i < flows_.size(); ++i) {
    auto& spec = scen_.flows[i];
    auto& m = flows_[i];
    if (m.start > now_ || m.sent >= spec.size
        || (now_ - m.start) % spec.interval != 0)
      continue;
    m.sent += 1;
    handle(packet{i, topo_.hosts.at(spec.src), 0}, out, false);
  }
  if ((now_ + 1) % opts_.stats_interval == 0) {
    stats_tick st;
    for (auto& [key, counter] : window_) {
      st.links.push_back(counter);
      stats_.push_back(
        stats_row{now_, counter.a, counter.b, counter.bytes, counter.drops});
      counter.bytes = 0;
      counter.drops = 0;
    }
    out.push_back({now_, std::move(st)});
  }
  trace_.insert(trace_.end(), out.begin(), out.end());
  ++now_;
  return out;
}

std::map<std::pair<std::string, std::string>,
         std::pair<std::int64_t, std::int64_t>>
simulator::conservation() const {
  std::map<std::pair<std::string, std::string>,
           std::pair<std::int64_t, std::int64_t>>
    out;
  for (std::size_t i = 0; i < flows_.size(); ++i) {
    auto& entry = out[{scen_.flows[i].src, scen_.flows[i].dst}];
    entry.first += flows_[i].sent;
    entry.second += flows_[i].delivered;
  }
  return out;
}

std::string stats_csv(const std::vector<stats_row>& rows) {
  std::ostringstream out;
  out << "tick,link_a,link_b,bytes,drops\n";
  for (auto& r : rows)
    out << r.at << ',' << r.a << ',' << r.b << ',' << r.bytes << ','
        << r.drops << '\n';
  return out.str();
}

} // namespace agentnet::netsim
