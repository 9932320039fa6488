#include "agentnet/oracle.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "agentnet/error.hpp"

namespace agentnet {

namespace {

datum rule_content(const netsim::flow_rule& r) {
  auto d = netsim::to_datum(r);
  d.erase("rule_id");
  return d;
}

bool chain_has(const run_config& cfg, function_kind k) {
  auto chain = orchestration::compose_chain(cfg.chain);
  return std::find(chain.kinds.begin(), chain.kinds.end(), k)
         != chain.kinds.end();
}

} // namespace

datum to_datum(const run_metrics& m) {
  return datum{{"flows", m.flows},
               {"flows_completed", m.flows_completed},
               {"flows_set_up", m.flows_set_up},
               {"packets_dropped", m.packets_dropped},
               {"mean_setup_latency", m.mean_setup_latency},
               {"ticks", m.ticks}};
}

datum run_outcome::to_datum() const {
  datum t = datum::object();
  for (auto& [sw, rules] : tables) {
    datum list = datum::array();
    for (auto& r : rules)
      list.push_back(netsim::to_datum(r));
    t[sw] = list;
  }
  datum s = datum::array();
  for (auto& sess : sessions)
    s.push_back(control::to_datum(sess));
  return datum{{"flow_tables", t},
               {"sessions", s},
               {"metrics", agentnet::to_datum(metrics)}};
}

run_outcome normalize(
  const std::map<std::string, std::vector<netsim::flow_rule>>& tables,
  std::vector<control::session> sessions, run_metrics metrics) {
  std::vector<netsim::flow_rule> all;
  for (auto& [sw, rules] : tables)
    all.insert(all.end(), rules.begin(), rules.end());
  std::sort(all.begin(), all.end(), [](auto& x, auto& y) {
    return std::tie(x.sw, x.match, x.priority, x.forward, x.rule_id)
           < std::tie(y.sw, y.match, y.priority, y.forward, y.rule_id);
  });
  std::map<std::uint64_t, std::uint64_t> relabel;
  run_outcome out;
  for (std::size_t i = 0; i < all.size(); ++i) {
    relabel[all[i].rule_id] = i + 1;
    all[i].rule_id = i + 1;
    out.tables[all[i].sw].push_back(all[i]);
  }
  std::sort(sessions.begin(), sessions.end(),
            [](auto& x, auto& y) { return x.id < y.id; });
  for (auto& s : sessions) {
    for (auto& id : s.rule_ids) {
      auto i = relabel.find(id);
      id = i == relabel.end() ? 0 : i->second;
    }
    std::sort(s.rule_ids.begin(), s.rule_ids.end());
  }
  out.sessions = std::move(sessions);
  out.metrics = metrics;
  return out;
}

run_metrics measure(const netsim::simulator& sim) {
  run_metrics m;
  auto& specs = sim.scen().flows;
  auto& flows = sim.flows();
  double total = 0;
  for (std::size_t i = 0; i < flows.size(); ++i) {
    ++m.flows;
    if (flows[i].delivered >= specs[i].size)
      ++m.flows_completed;
    if (flows[i].first_forward) {
      ++m.flows_set_up;
      total += static_cast<double>(*flows[i].first_forward - flows[i].start);
    }
  }
  if (m.flows_set_up > 0)
    m.mean_setup_latency = total / static_cast<double>(m.flows_set_up);
  m.packets_dropped = sim.packets_dropped();
  m.ticks = sim.now();
  return m;
}

run_outcome run_monolithic(const run_config& cfg,
                           std::vector<std::string>* log) {
  control::controller_config cc;
  cc.classifier = cfg.classifier;
  cc.qos = cfg.qos;
  cc.use_classifier = chain_has(cfg, function_kind::classifier);
  cc.use_qos = chain_has(cfg, function_kind::qos);
  for (auto& p : cfg.policies)
    if (p.scope.count(function_kind::forwarding))
      cc.policies.push_back(p);
  bool enabled = chain_has(cfg, function_kind::session);
  control::controller ctl{cfg.topo, cc};
  auto opts = cfg.sim;
  opts.apply_scenario_failures = true;
  netsim::simulator sim{cfg.topo, cfg.scen, opts};
  auto apply = [&] {
    auto sb = ctl.take_southbound();
    for (auto id : sb.removed)
      sim.remove_rule(id);
    for (auto& r : sb.installed)
      sim.install_rule(r);
  };
  auto note = [&](datum line) {
    if (log)
      log->push_back(line.dump());
  };
  note({{"tick", 0}, {"event", "start"}, {"mode", "monolithic"}});
  if (enabled && cfg.proactive && cc.use_classifier) {
    for (auto& f : cfg.scen.flows)
      ctl.prepare(f);
    apply();
  }
  while (sim.now() < cfg.scen.duration_ticks) {
    for (auto& ev : sim.step()) {
      if (!enabled)
        continue;
      if (auto* p = std::get_if<netsim::packet_in>(&ev.body)) {
        ctl.on_packet_in(*p);
      } else if (auto* d = std::get_if<netsim::link_down>(&ev.body)) {
        auto touched = ctl.on_link_down(d->a, d->b);
        note({{"tick", ev.at}, {"event", "reroute"}, {"sessions", touched}});
      } else if (auto* u = std::get_if<netsim::link_up>(&ev.body)) {
        ctl.on_link_up(u->a, u->b);
      }
    }
    apply();
  }
  std::vector<control::session> sessions;
  for (auto& [id, s] : ctl.sessions())
    sessions.push_back(s);
  for (auto& e : ctl.escalations())
    note({{"event", "escalation"}, {"issue", e}});
  note({{"tick", sim.now()}, {"event", "end"}});
  auto out = normalize(sim.flow_tables(), std::move(sessions), measure(sim));
  out.stats = sim.stats();
  return out;
}

// -- compare ------------------------------------------------------------------

diff_report compare(const run_outcome& a, const run_outcome& b) {
  diff_report report;
  report.a = a.metrics;
  report.b = b.metrics;
  std::multiset<std::string> ra;
  std::multiset<std::string> rb;
  for (auto& [sw, rules] : a.tables)
    for (auto& r : rules)
      ra.insert(rule_content(r).dump());
  for (auto& [sw, rules] : b.tables)
    for (auto& r : rules)
      rb.insert(rule_content(r).dump());
  std::vector<std::string> only_a;
  std::vector<std::string> only_b;
  std::set_difference(ra.begin(), ra.end(), rb.begin(), rb.end(),
                      std::back_inserter(only_a));
  std::set_difference(rb.begin(), rb.end(), ra.begin(), ra.end(),
                      std::back_inserter(only_b));
  for (auto& r : only_a)
    report.entries.push_back({"rule", "only_a", datum::parse(r), datum{}});
  for (auto& r : only_b)
    report.entries.push_back({"rule", "only_b", datum{}, datum::parse(r)});
  std::map<std::uint64_t, datum> sa;
  std::map<std::uint64_t, datum> sb;
  for (auto& s : a.sessions)
    sa[s.id] = control::to_datum(s);
  for (auto& s : b.sessions)
    sb[s.id] = control::to_datum(s);
  for (auto& [id, d] : sa) {
    auto other = sb.find(id);
    if (other == sb.end())
      report.entries.push_back({"session", "only_a", d, datum{}});
    else if (other->second != d)
      report.entries.push_back({"session", "differs", d, other->second});
  }
  for (auto& [id, d] : sb)
    if (!sa.count(id))
      report.entries.push_back({"session", "only_b", datum{}, d});
  return report;
}

datum diff_report::to_datum() const {
  datum list = datum::array();
  for (auto& e : entries) {
    datum item{{"what", e.what}, {"side", e.side}};
    if (!e.a.is_null())
      item["a"] = e.a;
    if (!e.b.is_null())
      item["b"] = e.b;
    list.push_back(item);
  }
  return datum{{"empty", empty()},
               {"differences", list},
               {"metrics", {{"a", agentnet::to_datum(a)},
                            {"b", agentnet::to_datum(b)}}}};
}

std::string diff_report::to_text() const {
  std::ostringstream out;
  if (empty())
    out << "diff: empty\n";
  else
    out << "diff: " << entries.size() << " difference(s)\n";
  for (auto& e : entries) {
    out << "  " << e.what << ' ' << e.side;
    if (!e.a.is_null())
      out << " a=" << e.a.dump();
    if (!e.b.is_null())
      out << " b=" << e.b.dump();
    out << '\n';
  }
  out << "  setup latency: a=" << a.mean_setup_latency
      << " b=" << b.mean_setup_latency << '\n';
  return out.str();
}

// -- configuration files ------------------------------------------------------

namespace {

datum read_json(const std::filesystem::path& path) {
  std::ifstream in{path};
  if (!in)
    throw error{errc::file_error, "cannot open " + path.string()};
  try {
    return datum::parse(in);
  } catch (const datum::exception& ex) {
    throw error{errc::schema_error, path.string() + ": " + ex.what()};
  }
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& p) {
  std::filesystem::path path{p};
  return path.is_absolute() ? path : base / path;
}

} // namespace

config_file load_config_file(const std::filesystem::path& path) {
  auto doc = read_json(path);
  return load_config(doc, path.parent_path());
}

config_file load_config(const datum& doc, const std::filesystem::path& base) {
  if (!doc.is_object())
    throw error{errc::schema_error, "config must be a JSON object"};
  config_file out;
  auto& run = out.run;
  try {
    if (!doc.contains("topology") || !doc.contains("scenario"))
      throw error{errc::schema_error, "config needs topology and scenario"};
    run.topo = netsim::load_topology_file(
      resolve(base, doc.at("topology").get<std::string>()));
    run.scen = netsim::load_scenario_file(
      resolve(base, doc.at("scenario").get<std::string>()));
    out.mode = doc.value("mode", std::string{"agents"});
    if (out.mode != "agents" && out.mode != "monolithic"
        && out.mode != "compare")
      throw error{errc::schema_error, "unknown mode " + out.mode};
    if (doc.contains("chain"))
      run.chain = doc.at("chain").get<std::vector<std::string>>();
    orchestration::compose_chain(run.chain);
    if (doc.contains("nodes")) {
      run.nodes.clear();
      for (auto& n : doc.at("nodes"))
        run.nodes.push_back({n.at("node").get<std::string>(),
                             n.at("cpu").get<std::int64_t>(),
                             n.at("mem").get<std::int64_t>(),
                             {}});
    }
    if (doc.contains("demands"))
      for (auto& [k, d] : doc.at("demands").items()) {
        auto kind = parse_kind(k);
        if (!kind)
          throw error{errc::unknown_kind, k};
        run.demands[*kind] = {d.value("cpu", std::int64_t{0}),
                              d.value("mem", std::int64_t{0})};
      }
    if (doc.contains("classifier")) {
      auto& c = doc.at("classifier");
      run.classifier.size_threshold =
        c.value("size_threshold", run.classifier.size_threshold);
      run.classifier.interarrival_threshold =
        c.value("interarrival_threshold", run.classifier.interarrival_threshold);
    }
    run.qos.cap_percent = doc.value("qos_cap", run.qos.cap_percent);
    if (doc.contains("event_strategy"))
      run.strategy =
        parse_strategy(doc.at("event_strategy").get<std::string>());
    if (doc.contains("pps_profiles")) {
      auto all = pps::default_profiles();
      run.profiles.clear();
      for (auto& name : doc.at("pps_profiles")) {
        auto it = std::find_if(all.begin(), all.end(),
                               [&](auto& p) { return p.id == name; });
        if (it == all.end())
          throw error{errc::schema_error,
                      "unknown profile " + name.get<std::string>()};
        run.profiles.push_back(*it);
      }
      if (run.profiles.empty())
        throw error{errc::schema_error, "pps_profiles is empty"};
    }
    run.proactive = doc.value("proactive", false);
    if (doc.contains("policies"))
      for (auto& p : doc.at("policies"))
        run.policies.push_back(policy_from(p));
    run.heartbeat_interval = doc.value("heartbeat_interval", tick{10});
    if (doc.contains("seed"))
      out.seed = doc.at("seed").get<std::uint64_t>();
  } catch (const datum::exception& ex) {
    throw error{errc::schema_error, std::string{"config: "} + ex.what()};
  }
  return out;
}

} // namespace agentnet
