#include "agentnet/agents.hpp"

#include <algorithm>

#include "agentnet/error.hpp"
#include "agentnet/netsim.hpp"

namespace agentnet::agents {

namespace {

using control::flow_class;

std::string op_of(const datum& body) {
  return body.is_object() ? body.value("op", std::string{}) : std::string{};
}

std::string topic_of(const message& m) {
  auto t = std::get_if<topic>(&m.dst);
  return t ? t->name : std::string{};
}

cognition_outcome idle() {
  return {datum{}, 1.0};
}

agent_id self_of(const facts_store& facts) {
  return agent_id_from(facts.value_or("self", datum{}));
}

plan_step set_fact(const facts_store& facts, std::string key, datum value) {
  return {"update_facts", self_of(facts),
          datum{{"key", std::move(key)}, {"value", std::move(value)}}};
}

plan_step request(const agent_id& to, datum body) {
  return {"request", to, datum{{"body", std::move(body)}}};
}

plan_step notify(const agent_id& to, datum body) {
  return {"notify", to, datum{{"body", std::move(body)}}};
}

plan_step publish(std::string name, datum body) {
  return {"publish", topic{std::move(name)}, datum{{"body", std::move(body)}}};
}

void absorb_topology(facts_store& facts, const message& input,
                     const datum& body, tick now) {
  if (topic_of(input) == "events.topology" && body.contains("topology"))
    facts.write("topology", body.at("topology"), now);
}

std::optional<netsim::topology> topology_of(const facts_store& facts) {
  auto t = facts.get("topology");
  if (!t)
    return std::nullopt;
  return netsim::load_topology(*t);
}

// -- switch adapter -----------------------------------------------------------

cognition_outcome adapter_cog(const facts_store&, const message& input,
                              const datum& body) {
  auto op = op_of(body);
  if (op == "sim") {
    auto& ev = body.at("event");
    auto type = ev.at("type").get<std::string>();
    std::string name = type == "PacketIn"    ? "events.packet_in"
                       : type == "StatsTick" ? "events.stats"
                                             : "events.link";
    return {datum{{"publish", name}, {"event", ev}}, 1.0};
  }
  if ((op == "install_rule" || op == "remove_rule")
      && input.kind == message_kind::request)
    return {datum{{"southbound", body}}, 1.0};
  return idle();
}

plan adapter_plan(const cognition_outcome& out, const facts_store&,
                  const message&, const datum&) {
  plan p;
  auto& d = out.decision;
  if (d.contains("publish")) {
    auto ev = d.at("event");
    ev["op"] = d.at("publish");
    p.steps.push_back(publish(d.at("publish").get<std::string>(), ev));
  } else if (d.contains("southbound")) {
    auto& sb = d.at("southbound");
    p.steps.push_back({"southbound", switch_ref{sb.at("switch")}, sb});
  }
  return p;
}

// -- topology -----------------------------------------------------------------

void topology_absorb(facts_store& facts, const message& input,
                     const datum& body, tick now) {
  if (topic_of(input) != "events.link")
    return;
  auto topo = facts.value_or("topology", datum{});
  if (!topo.is_object())
    return;
  auto type = body.at("type").get<std::string>();
  bool up = type == "LinkUp";
  auto a = body.at("a").get<std::string>();
  auto b = body.at("b").get<std::string>();
  for (auto& l : topo.at("links")) {
    bool hit = (l.at("a") == a && l.at("b") == b)
               || (l.at("a") == b && l.at("b") == a);
    if (!hit || l.value("up", true) == up)
      continue;
    l["up"] = up;
    facts.write("topology", topo, now);
    facts.write("change",
                datum{{"kind", up ? "up" : "down"},
                      {"a", a},
                      {"b", b},
                      {"cause", input.msg_id}},
                now);
  }
}

cognition_outcome topology_cog(const facts_store& facts, const message& input,
                               const datum&) {
  auto change = facts.value_or("change", datum{});
  if (change.is_object() && change.at("cause") == input.msg_id)
    return {datum{{"change", change}}, 1.0};
  return idle();
}

plan topology_plan(const cognition_outcome& out, const facts_store& facts,
                   const message&, const datum&) {
  plan p;
  if (!out.decision.contains("change"))
    return p;
  auto change = out.decision.at("change");
  change.erase("cause");
  p.steps.push_back(publish("events.topology",
                            datum{{"op", "topology"},
                                  {"topology", facts.value_or("topology", {})},
                                  {"change", change}}));
  return p;
}

// -- routing ------------------------------------------------------------------

cognition_outcome routing_cog(const facts_store& facts, const message& input,
                              const datum& body) {
  auto op = op_of(body);
  if (op == "violation" && input.kind == message_kind::event) {
    auto& req = body.at("request");
    return {datum{{"relay", req.at("reply_to")},
                  {"body", {{"op", "violation"},
                            {"session", req.at("session")},
                            {"request", req}}}},
            1.0};
  }
  if (input.kind != message_kind::request)
    return idle();
  if (op == "path") {
    auto topo = topology_of(facts);
    if (!topo)
      return {datum{{"need", "topology"}}, 1.0};
    try {
      auto path = control::compute_path(*topo, body.at("src"), body.at("dst"));
      return {datum{{"reply", {{"path", path.nodes}, {"cost", path.cost}}}},
              1.0};
    } catch (const error& ex) {
      return {datum{{"reply", {{"error", std::string{to_string(ex.code())}}}}},
              1.0};
    }
  }
  if (op != "route")
    return {datum{{"unexpected", op}}, 0.0};
  auto topo = topology_of(facts);
  if (!topo)
    return {datum{{"need", "topology"}}, 1.0};
  auto next = first_peer(facts, function_kind::qos);
  if (!next)
    next = first_peer(facts, function_kind::forwarding);
  if (!next)
    return {datum{{"issue", "no-forwarding"}, {"session", body.at("session")}},
            0.0};
  auto fwd = body;
  fwd["op"] = next->kind == function_kind::qos ? "admit" : "apply";
  fwd["path"] = datum::array();
  fwd["outcome"] = "";
  bool reroute = body.value("reroute", false);
  auto src = body.at("src").get<std::string>();
  auto dst = body.at("dst").get<std::string>();
  if (!topo->has_host(src) || !topo->has_host(dst)) {
    fwd["outcome"] = "unknown-host";
  } else {
    try {
      auto path = control::compute_path(*topo, topo->hosts.at(src),
                                        topo->hosts.at(dst));
      fwd["path"] = path.nodes;
    } catch (const error& ex) {
      if (ex.code() != errc::no_path)
        throw;
      fwd["outcome"] = reroute ? "unroutable" : "no-path";
    }
  }
  return {datum{{"next", to_string(*next)}, {"body", fwd}}, 1.0};
}

plan routing_plan(const cognition_outcome& out, const facts_store&,
                  const message& input, const datum&) {
  plan p;
  auto& d = out.decision;
  if (d.contains("need")) {
    p.requires_facts.push_back(d.at("need"));
    p.steps.push_back({"respond", input.src, datum{{"body", datum::object()}}});
  } else if (d.contains("reply")) {
    p.steps.push_back({"respond", input.src, datum{{"body", d.at("reply")}}});
  } else if (d.contains("next")) {
    p.requires_facts.push_back("topology");
    p.steps.push_back(request(agent_id_from(d.at("next")), d.at("body")));
  } else if (d.contains("relay")) {
    p.steps.push_back(notify(agent_id_from(d.at("relay")), d.at("body")));
  }
  return p;
}


// -- qos ----------------------------------------------------------------------

cognition_fn qos_cognition(control::qos_config cfg) {
  return [cfg](const facts_store& facts, const message& input,
               const datum& body) -> cognition_outcome {
    auto op = op_of(body);
    auto book = control::qos_book::from_datum(
      facts.value_or("book", control::qos_book{}.to_datum()), cfg);
    if (op == "violation" && input.kind == message_kind::event) {
      auto& req = body.at("request");
      book.release(req.at("session").get<std::uint64_t>());
      return {datum{{"book", book.to_datum()},
                    {"relay", req.at("reply_to")},
                    {"body", {{"op", "violation"},
                              {"session", req.at("session")},
                              {"request", req}}}},
              1.0};
    }
    if (input.kind != message_kind::request)
      return idle();
    if (op != "admit")
      return {datum{{"unexpected", op}}, 0.0};
    auto topo = topology_of(facts);
    if (!topo)
      return {datum{{"need", "topology"}}, 1.0};
    auto next = first_peer(facts, function_kind::forwarding);
    if (!next)
      return {datum{{"issue", "no-forwarding"}, {"session", body.at("session")}},
              0.0};
    auto id = body.at("session").get<std::uint64_t>();
    auto fwd = body;
    fwd["op"] = "apply";
    if (body.value("reroute", false))
      book.release(id);
    auto cls = control::class_from_hint(body.at("class").get<std::string>());
    auto path = body.at("path").get<std::vector<std::string>>();
    if (body.at("outcome") == "" && !book.admit(id, cls, path, *topo)) {
      fwd["outcome"] = "qos-denied";
      fwd["path"] = datum::array();
    }
    return {datum{{"book", book.to_datum()},
                  {"next", to_string(*next)},
                  {"body", fwd}},
            1.0};
  };
}

plan qos_plan(const cognition_outcome& out, const facts_store& facts,
              const message& input, const datum&) {
  plan p;
  auto& d = out.decision;
  if (d.contains("need")) {
    p.requires_facts.push_back(d.at("need"));
    p.steps.push_back({"respond", input.src, datum{{"body", datum::object()}}});
    return p;
  }
  if (d.contains("book") && facts.value_or("book", datum{}) != d.at("book"))
    p.steps.push_back(set_fact(facts, "book", d.at("book")));
  if (d.contains("next"))
    p.steps.push_back(request(agent_id_from(d.at("next")), d.at("body")));
  else if (d.contains("relay"))
    p.steps.push_back(notify(agent_id_from(d.at("relay")), d.at("body")));
  return p;
}

// -- forwarding ---------------------------------------------------------------

control::forwarding_state forwarding_of(const facts_store& facts) {
  return control::forwarding_state::from(
    facts.value_or("rules", datum::array()),
    facts.value_or("next_rule_id", datum(1)).get<std::uint64_t>());
}

cognition_outcome forwarding_cog(const facts_store& facts,
                                 const message& input, const datum& body) {
  if (input.kind != message_kind::request)
    return idle();
  if (op_of(body) != "apply")
    return {datum{{"unexpected", op_of(body)}}, 0.0};
  auto fwd = forwarding_of(facts);
  auto remove = body.value("remove", std::vector<std::uint64_t>{});
  std::vector<netsim::flow_rule> install;
  auto outcome = body.value("outcome", std::string{});
  if (outcome.empty()) {
    control::path_result path{body.at("path").get<std::vector<std::string>>(),
                              0};
    install = fwd.assign_ids(control::rules_for_path(
      path, body.at("src").get<std::string>(),
      body.at("dst").get<std::string>()));
  }
  datum rules = datum::array();
  datum ids = datum::array();
  for (auto& r : install) {
    rules.push_back(netsim::to_datum(r));
    ids.push_back(r.rule_id);
  }
  return {datum{{"remove", remove},
                {"install", rules},
                {"next_rule_id", fwd.next_rule_id},
                {"reply_to", body.at("reply_to")},
                {"notify", {{"op", "applied"},
                            {"session", body.at("session")},
                            {"outcome", outcome},
                            {"path", outcome.empty() ? body.at("path")
                                                     : datum::array()},
                            {"rule_ids", ids}}}},
          1.0};
}

plan forwarding_plan_of(const cognition_outcome& out, const facts_store& facts,
                        const message&, const datum&) {
  plan p;
  auto& d = out.decision;
  if (!d.contains("notify"))
    return p;
  auto fwd = forwarding_of(facts);
  auto remove = d.at("remove").get<std::vector<std::uint64_t>>();
  std::vector<netsim::flow_rule> install;
  for (auto& r : d.at("install"))
    install.push_back(netsim::flow_rule_from(r));
  auto peers = facts.value_or("peers", datum::array());
  p = control::forwarding_plan(
    fwd, remove, install,
    [&](const std::string& sw) -> std::optional<agent_id> {
      for (auto& peer : peers)
        if (peer.at("endpoint") == "switch://" + sw)
          return agent_id_from(peer.at("agent"));
      return std::nullopt;
    });
  p.requires_facts.push_back("topology");
  fwd.apply(remove, install);
  p.steps.push_back(set_fact(facts, "rules", fwd.rules_datum()));
  p.steps.push_back(set_fact(facts, "tables", fwd.tables()));
  p.steps.push_back(set_fact(facts, "next_rule_id", d.at("next_rule_id")));
  p.steps.push_back(notify(agent_id_from(d.at("reply_to")), d.at("notify")));
  return p;
}

// -- session ------------------------------------------------------------------

datum sessions_of(const facts_store& facts) {
  return facts.value_or("sessions", datum::object());
}

bool pair_seen(const facts_store& facts, const datum& src, const datum& dst) {
  for (auto& p : facts.value_or("pairs", datum::array()))
    if (p.at(0) == src && p.at(1) == dst)
      return true;
  return false;
}

cognition_outcome session_cog(const facts_store& facts, const message& input,
                              const datum& body) {
  auto op = op_of(body);
  auto t = topic_of(input);
  if (t == "events.packet_in" || (op == "prepare" && input.kind
                                                       == message_kind::request)) {
    if (pair_seen(facts, body.at("src"), body.at("dst")))
      return idle();
    if (!first_peer(facts, function_kind::routing))
      return {datum{{"issue", "no-routing"}}, 0.0};
    datum open{{"src", body.at("src")}, {"dst", body.at("dst")}};
    if (op == "prepare") {
      open["class"] = body.at("class");
    } else if (!first_peer(facts, function_kind::classifier)) {
      open["class"] = std::string{to_string(
        control::class_from_hint(body.value("class", std::string{})))};
    } else {
      open["features"] = {{"size", body.at("size")},
                          {"interval", body.at("interval")},
                          {"hint", body.value("class", std::string{})}};
    }
    return {datum{{"open", open}}, 1.0};
  }
  if (t == "events.topology") {
    auto change = body.value("change", datum::object());
    if (change.value("kind", std::string{}) != "down")
      return idle();
    datum affected = datum::array();
    auto sessions = sessions_of(facts);
    for (auto& [id, s] : sessions.items()) {
      auto sess = control::session_from(s);
      if (sess.state == control::session_state::active
          && control::path_uses(sess.path, change.at("a"), change.at("b")))
        affected.push_back(sess.id);
    }
    if (affected.empty())
      return idle();
    std::sort(affected.begin(), affected.end());
    return {datum{{"reroute", affected}}, 1.0};
  }
  if (op == "classified" && input.kind == message_kind::response)
    return {datum{{"classified", body}}, 1.0};
  if (op == "applied" && input.kind == message_kind::event)
    return {datum{{"applied", body}}, 1.0};
  if (op == "violation" && input.kind == message_kind::event)
    return {datum{{"violation", body}}, 1.0};
  return idle();
}

plan session_plan(const cognition_outcome& out, const facts_store& facts,
                  const message&, const datum&) {
  plan p;
  auto& d = out.decision;
  if (!d.is_object())
    return p;
  auto self = facts.value_or("self", datum{});
  auto sessions = sessions_of(facts);
  auto routing = first_peer(facts, function_kind::routing);
  auto route = [&](const datum& s, bool reroute) {
    datum remove = reroute ? s.at("rule_ids") : datum::array();
    p.steps.push_back(request(*routing, datum{{"op", "route"},
                                              {"session", s.at("session_id")},
                                              {"src", s.at("src")},
                                              {"dst", s.at("dst")},
                                              {"class", s.at("class")},
                                              {"reroute", reroute},
                                              {"remove", remove},
                                              {"reply_to", self}}));
  };
  if (d.contains("open")) {
    auto& o = d.at("open");
    auto id = facts.value_or("next_session", datum(1)).get<std::uint64_t>();
    control::session s;
    s.id = id;
    s.src = o.at("src");
    s.dst = o.at("dst");
    if (o.contains("class"))
      s.cls = control::class_from_hint(o.at("class"));
    auto sd = control::to_datum(s);
    sessions[std::to_string(id)] = sd;
    auto pairs = facts.value_or("pairs", datum::array());
    pairs.push_back({o.at("src"), o.at("dst")});
    p.steps.push_back(set_fact(facts, "sessions", sessions));
    p.steps.push_back(set_fact(facts, "pairs", pairs));
    p.steps.push_back(set_fact(facts, "next_session", id + 1));
    if (o.contains("class")) {
      route(sd, false);
    } else {
      auto classifier = first_peer(facts, function_kind::classifier);
      p.steps.push_back(request(*classifier,
                                datum{{"op", "classify"},
                                      {"session", id},
                                      {"features", o.at("features")}}));
    }
  } else if (d.contains("classified")) {
    auto key = std::to_string(d.at("classified").at("session").get<std::uint64_t>());
    if (!sessions.contains(key) || !routing)
      return p;
    sessions[key]["class"] = d.at("classified").at("class");
    p.steps.push_back(set_fact(facts, "sessions", sessions));
    route(sessions[key], false);
  } else if (d.contains("reroute")) {
    if (!routing)
      return p;
    for (auto& id : d.at("reroute")) {
      auto key = std::to_string(id.get<std::uint64_t>());
      sessions[key]["state"] = "Updating";
    }
    p.steps.push_back(set_fact(facts, "sessions", sessions));
    for (auto& id : d.at("reroute"))
      route(sessions[std::to_string(id.get<std::uint64_t>())], true);
  } else if (d.contains("applied")) {
    auto& a = d.at("applied");
    auto key = std::to_string(a.at("session").get<std::uint64_t>());
    if (!sessions.contains(key))
      return p;
    auto& s = sessions[key];
    auto outcome = a.at("outcome").get<std::string>();
    if (outcome.empty()) {
      s["state"] = "Active";
      s["reason"] = "";
      s["path"] = a.at("path");
      s["rule_ids"] = a.at("rule_ids");
    } else {
      s["state"] = "Removed";
      s["reason"] = outcome;
      s["path"] = datum::array();
      s["rule_ids"] = datum::array();
    }
    p.steps.push_back(set_fact(facts, "sessions", sessions));
    if (outcome == "no-path" || outcome == "unroutable")
      p.steps.push_back({"escalate", agent_id_from(self),
                         datum{{"issue", {{"issue", outcome},
                                          {"session", s.at("session_id")}}}}});
  } else if (d.contains("violation")) {
    auto& req = d.at("violation").at("request");
    auto key = std::to_string(req.at("session").get<std::uint64_t>());
    if (!sessions.contains(key))
      return p;
    auto remove = req.value("remove", datum::array());
    auto forwarding = first_peer(facts, function_kind::forwarding);
    if (!remove.empty() && req.value("outcome", std::string{}) != "policy"
        && forwarding) {
      p.steps.push_back(request(*forwarding,
                                datum{{"op", "apply"},
                                      {"session", req.at("session")},
                                      {"src", req.at("src")},
                                      {"dst", req.at("dst")},
                                      {"class", req.at("class")},
                                      {"path", datum::array()},
                                      {"remove", remove},
                                      {"outcome", "policy"},
                                      {"reply_to", self}}));
    } else {
      auto& s = sessions[key];
      s["state"] = "Removed";
      s["reason"] = "policy";
      s["path"] = datum::array();
      s["rule_ids"] = datum::array();
      p.steps.push_back(set_fact(facts, "sessions", sessions));
    }
  }
  return p;
}

// -- classifier ---------------------------------------------------------------

cognition_fn classifier_cognition(control::classifier_config cfg) {
  return [cfg](const facts_store& facts, const message& input,
               const datum& body) -> cognition_outcome {
    auto op = op_of(body);
    if (op == "classify" && input.kind == message_kind::request) {
      auto& f = body.at("features");
      control::flow_features feat{f.at("size").get<std::int64_t>(),
                                  f.at("interval").get<tick>(),
                                  f.value("hint", std::string{})};
      return {datum{{"reply",
                     {{"op", "classified"},
                      {"session", body.at("session")},
                      {"class", std::string{to_string(
                                  control::classify_flow(feat, cfg))}}}}},
              1.0};
    }
    if (topic_of(input) == "events.schedule") {
      auto session = first_peer(facts, function_kind::session);
      if (!session)
        return {datum{{"issue", "no-session"}}, 0.0};
      datum prepares = datum::array();
      for (auto& f : body.at("flows")) {
        control::flow_features feat{f.at("size").get<std::int64_t>(),
                                    f.value("interval", tick{1}),
                                    f.value("class", std::string{})};
        prepares.push_back(
          {{"op", "prepare"},
           {"src", f.at("src")},
           {"dst", f.at("dst")},
           {"class",
            std::string{to_string(control::classify_flow(feat, cfg))}}});
      }
      return {datum{{"to", to_string(*session)}, {"prepare", prepares}}, 1.0};
    }
    return idle();
  };
}

plan classifier_plan(const cognition_outcome& out, const facts_store&,
                     const message& input, const datum&) {
  plan p;
  auto& d = out.decision;
  if (!d.is_object())
    return p;
  if (d.contains("reply"))
    p.steps.push_back({"respond", input.src, datum{{"body", d.at("reply")}}});
  if (d.contains("prepare"))
    for (auto& body : d.at("prepare"))
      p.steps.push_back(request(agent_id_from(d.at("to")), body));
  return p;
}

// -- monitoring, fault, discovery, stubs --------------------------------------

void monitoring_absorb(facts_store& facts, const message& input,
                       const datum& body, tick now) {
  if (topic_of(input) == "events.stats")
    facts.write("link_stats", body.at("links"), now);
}

void fault_absorb(facts_store& facts, const message& input, const datum& body,
                  tick now) {
  if (op_of(body) != "escalation" || input.kind != message_kind::request)
    return;
  auto incidents = facts.value_or("incidents", datum::array());
  incidents.push_back({{"from", body.at("from")},
                       {"issue", body.at("issue")},
                       {"raised_at", body.at("raised_at")},
                       {"received_at", now}});
  facts.write("incidents", incidents, now);
}

cognition_outcome fault_cog(const facts_store&, const message& input,
                            const datum& body) {
  if (op_of(body) == "escalation" && input.kind == message_kind::request)
    return {datum{{"reply", {{"op", "ack"}}}}, 1.0};
  return idle();
}

cognition_outcome discovery_cog(const facts_store& facts, const message& input,
                                const datum& body) {
  if (op_of(body) != "discover" || input.kind != message_kind::request)
    return idle();
  auto kind = parse_kind(body.value("kind", std::string{}));
  if (!kind)
    return {datum{{"unknown_kind", body.value("kind", std::string{})}}, 0.0};
  datum found = datum::array();
  for (auto& p : facts.value_or("peers", datum::array()))
    if (offers(service_descriptor_from(p), *kind))
      found.push_back(p);
  return {datum{{"reply", {{"op", "discovered"}, {"services", found}}}}, 1.0};
}

plan reply_plan(const cognition_outcome& out, const facts_store&,
                const message& input, const datum&) {
  plan p;
  if (out.decision.is_object() && out.decision.contains("reply"))
    p.steps.push_back(
      {"respond", input.src, datum{{"body", out.decision.at("reply")}}});
  return p;
}

cognition_outcome stub_cog(const facts_store&, const message&, const datum&) {
  return idle();
}

plan no_plan(const cognition_outcome&, const facts_store&, const message&,
             const datum&) {
  return {};
}

} // namespace

std::optional<agent_id> first_peer(const facts_store& facts,
                                   function_kind kind) {
  std::optional<agent_id> best;
  for (auto& p : facts.value_or("peers", datum::array())) {
    auto id = agent_id_from(p.at("agent"));
    if (id.kind == kind && (!best || id < *best))
      best = id;
  }
  return best;
}

std::string default_cognition(function_kind kind) {
  switch (kind) {
    case function_kind::switch_adapter: return "adapter.bridge";
    case function_kind::topology: return "topology.tracker";
    case function_kind::routing: return "routing.shortest_path";
    case function_kind::qos: return "qos.admission";
    case function_kind::forwarding: return "forwarding.table";
    case function_kind::session: return "session.manager";
    case function_kind::classifier: return "classifier.threshold";
    case function_kind::monitoring: return "monitoring.stats";
    case function_kind::fault: return "fault.incident";
    case function_kind::auto_config_discovery: return "autoconfig.discovery";
    case function_kind::registry: return "registry.nrf";
    case function_kind::orchestration: return "orchestration.ffd";
    default: return "stub.log";
  }
}

std::vector<std::string> default_subscriptions(function_kind kind) {
  std::vector<std::string> subs{"control.registry"};
  switch (kind) {
    case function_kind::topology: subs.push_back("events.link"); break;
    case function_kind::routing:
    case function_kind::qos:
    case function_kind::forwarding:
    case function_kind::session:
      subs.push_back("events.topology");
      break;
    default: break;
  }
  if (kind == function_kind::session)
    subs.push_back("events.packet_in");
  if (kind == function_kind::classifier)
    subs.push_back("events.schedule");
  if (kind == function_kind::monitoring)
    subs.push_back("events.stats");
  if (kind == function_kind::registry)
    subs.push_back("control.heartbeat");
  if (kind == function_kind::orchestration) {
    subs.push_back("control.heartbeat");
    subs.push_back("control.tick");
    subs.push_back("kp.digest");
  }
  return subs;
}

agent_spec default_spec(agent_id id) {
  agent_spec spec;
  spec.id = id;
  spec.cognition = default_cognition(id.kind);
  spec.subscriptions = default_subscriptions(id.kind);
  return spec;
}

void install(runtime& rt, const agents_config& cfg) {
  auto& cogs = rt.cognitions();
  cogs.add("adapter.bridge", adapter_cog);
  cogs.add("topology.tracker", topology_cog);
  cogs.add("routing.shortest_path", routing_cog);
  cogs.add("qos.admission", qos_cognition(cfg.qos));
  cogs.add("forwarding.table", forwarding_cog);
  cogs.add("session.manager", session_cog);
  cogs.add("classifier.threshold", classifier_cognition(cfg.classifier));
  cogs.add("monitoring.stats", stub_cog);
  cogs.add("fault.incident", fault_cog);
  cogs.add("autoconfig.discovery", discovery_cog);
  cogs.add("stub.log", stub_cog);

  rt.set_behavior(function_kind::switch_adapter, {nullptr, adapter_plan});
  rt.set_behavior(function_kind::topology, {topology_absorb, topology_plan});
  rt.set_behavior(function_kind::routing, {absorb_topology, routing_plan});
  rt.set_behavior(function_kind::qos, {absorb_topology, qos_plan});
  rt.set_behavior(function_kind::forwarding,
                  {absorb_topology, forwarding_plan_of});
  rt.set_behavior(function_kind::session, {nullptr, session_plan});
  rt.set_behavior(function_kind::classifier, {nullptr, classifier_plan});
  rt.set_behavior(function_kind::monitoring, {monitoring_absorb, no_plan});
  rt.set_behavior(function_kind::fault, {fault_absorb, reply_plan});
  rt.set_behavior(function_kind::auto_config_discovery, {nullptr, reply_plan});
  for (auto kind : {function_kind::mobility, function_kind::service_app,
                    function_kind::security, function_kind::resilience,
                    function_kind::event_distribution})
    rt.set_behavior(kind, {nullptr, no_plan});
}

} // namespace agentnet::agents
