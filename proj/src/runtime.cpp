#include "agentnet/runtime.hpp"

#include <algorithm>

#include "agentnet/error.hpp"
#include "agentnet/gana.hpp"

namespace agentnet {

namespace detail {
void install_registry_behavior(runtime& rt);
} // namespace detail

std::string_view to_string(stage s) noexcept {
  switch (s) {
    case stage::input: return "INPUT";
    case stage::facts: return "FACTS";
    case stage::cognition: return "COGNITION";
    case stage::planning: return "PLANNING";
    case stage::validation: return "VALIDATION";
    case stage::output: return "OUTPUT";
  }
  return "?";
}

datum to_datum(const stage_record& rec) {
  datum out{{"tick", rec.at},
            {"agent", to_string(rec.agent)},
            {"input", rec.input},
            {"stage", std::string{to_string(rec.st)}}};
  if (rec.st == stage::validation)
    out["passed"] = rec.passed;
  if (rec.st == stage::output)
    out["actions"] = rec.actions;
  if (!rec.detail.empty())
    out["detail"] = rec.detail;
  return out;
}

void cognition_registry::add(std::string name, cognition_fn fn) {
  fns_.insert_or_assign(std::move(name), std::move(fn));
}

const cognition_fn* cognition_registry::find(const std::string& name) const {
  auto i = fns_.find(name);
  return i == fns_.end() ? nullptr : &i->second;
}

bool is_housekeeping(const destination& dst) {
  auto t = std::get_if<topic>(&dst);
  if (!t)
    return false;
  return t->name.starts_with("control.") || t->name.starts_with("kp.");
}

runtime::runtime(runtime_options options)
  : opts_(std::move(options)), brokers_(opts_.strategy) {
  detail::install_registry_behavior(*this);
}

void runtime::set_behavior(function_kind kind, behavior b) {
  behaviors_.insert_or_assign(kind, std::move(b));
}

void runtime::set_effect(const std::string& action, effect_fn fn) {
  effects_.insert_or_assign(action, std::move(fn));
}

runtime::agent_state& runtime::state(const agent_id& id) {
  auto i = agents_.find(id);
  if (i == agents_.end())
    throw error{errc::agent_not_live, to_string(id)};
  return i->second;
}

const runtime::agent_state& runtime::state(const agent_id& id) const {
  auto i = agents_.find(id);
  if (i == agents_.end())
    throw error{errc::agent_not_live, to_string(id)};
  return i->second;
}

// -- lifecycle ----------------------------------------------------------------

agent_id runtime::spawn_agent(const agent_spec& spec) {
  if (spec.id.level != level_of(spec.id.kind))
    throw error{errc::schema_error, "agent level does not match its kind"};
  if (auto i = agents_.find(spec.id);
      i != agents_.end() && (i->second.live || i->second.crashed))
    throw error{errc::duplicate_agent, to_string(spec.id)};
  if (!cognitions_.find(spec.cognition))
    throw error{errc::unknown_cognition, spec.cognition};
  agent_state st;
  st.spec = spec;
  if (st.spec.endpoint.empty())
    st.spec.endpoint = "agent://" + to_string(spec.id);
  st.spec.capabilities.insert(spec.id.kind);
  for (auto& [key, value] : spec.initial_facts.items())
    st.facts.write(key, value, now_);
  st.facts.write("self", to_string(spec.id), now_);
  datum peers = datum::array();
  if (auto reg = registry_agent())
    for (auto& d : load_registry(*reg).live(now_))
      peers.push_back(to_datum(d));
  if (!st.facts.contains("peers"))
    st.facts.write("peers", peers, now_);
  agents_.insert_or_assign(spec.id, std::move(st));
  for (auto& filter : spec.subscriptions)
    brokers_.subscribe(spec.id, filter);
  auto& fresh = agents_.at(spec.id);
  service_descriptor desc{spec.id, fresh.spec.capabilities,
                          fresh.spec.endpoint, opts_.lease_ttl};
  if (spec.id.kind == function_kind::registry) {
    auto table = load_registry(spec.id);
    for (auto& d : pending_registrations_)
      table.register_service(d, now_);
    pending_registrations_.clear();
    store_registry(spec.id, table);
  }
  register_direct(desc);
  export_digest(agents_.at(spec.id));
  return spec.id;
}

void runtime::stop_agent(const agent_id& id) {
  auto& st = state(id);
  if (!st.live)
    throw error{errc::agent_not_live, to_string(id)};
  st.live = false;
  brokers_.unsubscribe(id);
  dead_letters_.erase(id);
  if (lease_of(id))
    deregister_direct(id);
}

void runtime::kill_agent(const agent_id& id) {
  auto& st = state(id);
  if (!st.live)
    throw error{errc::agent_not_live, to_string(id)};
  st.live = false;
  st.crashed = true;
}

void runtime::redirect(const agent_id& from, const agent_id& to) {
  alias_.insert_or_assign(from, to);
  brokers_.unsubscribe(from);
  if (auto i = agents_.find(from); i != agents_.end())
    i->second.crashed = false;
  auto held = dead_letters_.find(from);
  if (held == dead_letters_.end())
    return;
  for (auto& p : held->second) {
    p.to = to;
    queue_.emplace(std::pair{now_ + 1, queue_seq_++}, std::move(p));
  }
  dead_letters_.erase(held);
}

std::size_t runtime::abandon(const agent_id& id) {
  auto& st = state(id);
  st.crashed = false;
  brokers_.unsubscribe(id);
  std::size_t dropped = 0;
  if (auto held = dead_letters_.find(id); held != dead_letters_.end()) {
    dropped = held->second.size();
    dead_letters_.erase(held);
  }
  if (lease_of(id))
    deregister_direct(id);
  return dropped;
}

bool runtime::is_live(const agent_id& id) const {
  auto i = agents_.find(id);
  return i != agents_.end() && i->second.live;
}

std::optional<agent_id> runtime::alias_of(const agent_id& id) const {
  std::optional<agent_id> out;
  for (auto a = alias_.find(id); a != alias_.end(); a = alias_.find(a->second))
    out = a->second;
  return out;
}

std::vector<agent_id> runtime::live_agents() const {
  std::vector<agent_id> out;
  for (auto& [id, st] : agents_)
    if (st.live)
      out.push_back(id);
  return out;
}

const agent_spec& runtime::spec_of(const agent_id& id) const {
  return state(id).spec;
}

const facts_store& runtime::facts(const agent_id& id) const {
  return state(id).facts;
}

std::vector<policy> runtime::policies(const agent_id& id) const {
  std::vector<policy> out;
  if (auto p = state(id).facts.get("policies"))
    for (auto& item : *p)
      out.push_back(policy_from(item));
  return out;
}

// -- registry -----------------------------------------------------------------

std::optional<agent_id> runtime::registry_agent() const {
  for (auto& [id, st] : agents_)
    if (id.kind == function_kind::registry && st.live)
      return id;
  return std::nullopt;
}

service_registry runtime::load_registry(const agent_id& reg) const {
  if (auto leases = state(reg).facts.get("leases"))
    return service_registry::from_datum(*leases);
  return {};
}

void runtime::store_registry(const agent_id& reg,
                             const service_registry& table) {
  auto& facts = state(reg).facts;
  facts.write("leases", table.to_datum(), now_);
  datum members = datum::array();
  for (auto& d : table.live(now_))
    members.push_back(to_datum(d));
  if (facts.value_or("members", datum{}) != members) {
    facts.write("members", members, now_);
    facts.write("peers", members, now_);
  }
}

void runtime::register_direct(const service_descriptor& desc) {
  auto reg = registry_agent();
  if (!reg) {
    pending_registrations_.push_back(desc);
    return;
  }
  auto table = load_registry(*reg);
  table.register_service(desc, now_);
  store_registry(*reg, table);
  auto& facts = state(*reg).facts;
  auto known = facts.value_or("descriptors", datum::object());
  known[to_string(desc.agent)] = to_datum(desc);
  facts.write("descriptors", known, now_);
  announce_membership();
}

void runtime::deregister_direct(const agent_id& id) {
  auto reg = registry_agent();
  if (!reg)
    return;
  auto table = load_registry(*reg);
  if (!table.find(id))
    return;
  table.deregister(id);
  store_registry(*reg, table);
  auto& facts = state(*reg).facts;
  auto known = facts.value_or("descriptors", datum::object());
  known.erase(to_string(id));
  facts.write("descriptors", known, now_);
  announce_membership();
}

void runtime::announce_membership() {
  auto reg = registry_agent();
  if (!reg)
    return;
  auto members = state(*reg).facts.value_or("members", datum::array());
  send(make(*reg, topic{"control.registry"}, message_kind::event,
            datum{{"op", "membership"}, {"members", members}}));
}

std::vector<service_descriptor>
runtime::discover(function_kind kind, std::optional<gana_level> level) const {
  auto reg = registry_agent();
  if (!reg)
    return {};
  return load_registry(*reg).discover(kind, level, now_);
}

std::optional<lease> runtime::lease_of(const agent_id& id) const {
  auto reg = registry_agent();
  if (!reg)
    return std::nullopt;
  return load_registry(*reg).find(id);
}

// -- pipeline -----------------------------------------------------------------

void runtime::record(stage_record rec) {
  if (opts_.keep_stage_log)
    stage_log_.push_back(std::move(rec));
}

std::vector<message> runtime::process_input(const agent_id& id,
                                            const message& input) {
  auto& agent = state(id);
  if (!agent.live)
    throw error{errc::agent_not_live, to_string(id)};
  if (!agent.seen.insert({input.src, input.msg_id}).second)
    return {};
  auto body = decode_body(input.payload);
  record({now_, id, input.msg_id, stage::input, true, {},
          std::string{to_string(input.kind)} + " from " + to_string(input.src)});

  // FACTS
  if (input.kind == message_kind::policy) {
    auto incoming = policy_from(body);
    datum list = datum::array();
    if (auto cur = agent.facts.get("policies"))
      for (auto& p : *cur)
        if (p.at("policy_id") != incoming.policy_id)
          list.push_back(p);
    list.push_back(to_datum(incoming));
    agent.facts.write("policies", list, now_);
  } else if (auto t = std::get_if<topic>(&input.dst);
             t && t->name == "control.registry") {
    if (agent.facts.value_or("peers", datum{}) != body.at("members"))
      agent.facts.write("peers", body.at("members"), now_);
  }
  auto beh = behaviors_.find(id.kind);
  if (beh != behaviors_.end() && beh->second.absorb)
    beh->second.absorb(agent.facts, input, body, now_);
  record({now_, id, input.msg_id, stage::facts, true, {}, {}});

  // COGNITION
  auto fn = cognitions_.find(agent.spec.cognition);
  if (!fn)
    throw error{errc::unknown_cognition, agent.spec.cognition};
  auto outcome = (*fn)(agent.facts, input, body);
  outcome.confidence = std::clamp(outcome.confidence, 0.0, 1.0);
  record({now_, id, input.msg_id, stage::cognition, true, {},
          "confidence=" + std::to_string(outcome.confidence)});

  // PLANNING
  plan p;
  if (outcome.confidence < opts_.escalation_threshold) {
    p.steps.push_back(
      {"escalate", id, datum{{"issue", outcome.decision}}});
  } else if (beh != behaviors_.end() && beh->second.planner) {
    p = beh->second.planner(outcome, agent.facts, input, body);
  }
  record({now_, id, input.msg_id, stage::planning, true, {},
          std::to_string(p.steps.size()) + " steps"});
  if (p.empty()) {
    export_digest(agent);
    return {};
  }

  // VALIDATION
  auto report = validate_plan(p, agent.facts, policies(id));
  std::string detail;
  for (auto& v : report.violations)
    detail += (detail.empty() ? "" : ",") + v.constraint;
  record({now_, id, input.msg_id, stage::validation, report.passed, {}, detail});
  if (!report.passed) {
    datum violations = datum::array();
    for (auto& v : report.violations)
      violations.push_back({{"constraint", v.constraint}, {"detail", v.detail}});
    datum diag{{"op", "violation"},
               {"agent", to_string(id)},
               {"input", input.msg_id},
               {"request", body},
               {"violations", violations}};
    destination dst = topic{"events.violation"};
    if (input.src != id && agents_.count(input.src) > 0)
      dst = input.src;
    std::vector<message> out;
    out.push_back(make(id, dst, message_kind::event, diag, input.msg_id));
    ++violations_;
    export_digest(agent);
    return out;
  }

  // OUTPUT
  auto out = run_output(agent, input, p);
  export_digest(agent);
  return out;
}

std::vector<message> runtime::run_output(agent_state& agent,
                                         const message& input, const plan& p) {
  auto id = agent.spec.id;
  std::vector<message> out;
  std::vector<std::uint64_t> actions;
  auto emit = [&](message msg) {
    actions.push_back(msg.msg_id);
    out.push_back(std::move(msg));
  };
  for (auto& step : p.steps) {
    auto body = step.params.value("body", datum::object());
    if (step.action == "update_facts") {
      agent.facts.write(step.params.at("key").get<std::string>(),
                        step.params.at("value"), now_);
    } else if (step.action == "request") {
      emit(make(id, std::get<agent_id>(step.target), message_kind::request,
                body));
    } else if (step.action == "respond") {
      auto corr = step.params.value("correlation", input.msg_id);
      emit(make(id, std::get<agent_id>(step.target), message_kind::response,
                body, corr));
    } else if (step.action == "notify") {
      emit(make(id, std::get<agent_id>(step.target), message_kind::event,
                body));
    } else if (step.action == "publish") {
      emit(make(id, std::get<topic>(step.target), message_kind::event, body));
    } else if (step.action == "escalate") {
      try {
        auto receipt = escalate(*this, escalation{id, step.params.at("issue"),
                                                  now_});
        actions.push_back(receipt.msg_id);
      } catch (const error& ex) {
        if (ex.code() != errc::no_upper_agent)
          throw;
        emit(make(id, topic{"events.escalation.unhandled"},
                  message_kind::event,
                  datum{{"issue", step.params.at("issue")}}));
      }
    } else if ((step.action == "install_rule" || step.action == "remove_rule")
               && step.params.contains("via")) {
      auto via = agent_id_from(step.params.at("via"));
      datum req{{"op", step.action},
                {"switch", std::get<switch_ref>(step.target).id}};
      if (step.params.contains("rule"))
        req["rule"] = step.params.at("rule");
      if (step.params.contains("rule_id"))
        req["rule_id"] = step.params.at("rule_id");
      emit(make(id, via, message_kind::request, req));
    } else {
      auto fx = effects_.find(step.action);
      if (fx == effects_.end())
        throw error{errc::validation_failed, "no effect for " + step.action};
      for (auto& msg : fx->second(*this, id, step))
        emit(std::move(msg));
      actions.push_back(0); // marks a side-effecting step
    }
  }
  actions.erase(std::remove(actions.begin(), actions.end(), 0), actions.end());
  record({now_, id, input.msg_id, stage::output, true, actions,
          std::to_string(p.steps.size()) + " steps"});
  return out;
}

void runtime::export_digest(agent_state& agent) {
  if (!opts_.export_digests
      || agent.facts.total_writes() == agent.exported_writes
      || agent.spec.id.kind == function_kind::orchestration)
    return;
  agent.exported_writes = agent.facts.total_writes();
  send(make(agent.spec.id, topic{"kp.digest"}, message_kind::event,
            datum{{"agent", to_string(agent.spec.id)},
                  {"node", agent.spec.node},
                  {"facts", agent.facts.values()},
                  {"at", now_}}));
}

std::uint64_t runtime::update_facts(const agent_id& id, const std::string& key,
                                    datum value) {
  auto& agent = state(id);
  if (!agent.live)
    throw error{errc::agent_not_live, to_string(id)};
  return agent.facts.write(key, std::move(value), now_);
}

// -- messaging ----------------------------------------------------------------

message runtime::make(const agent_id& src, destination dst, message_kind kind,
                      const datum& body,
                      std::optional<std::uint64_t> correlation) {
  return factory_.make(src, std::move(dst), kind, encode_body(body), now_,
                       correlation);
}

const pps::stack_profile& runtime::link_profile(const agent_id& src,
                                                const agent_id& dst) {
  auto key = std::pair{src, dst};
  auto i = profiles_.find(key);
  if (i != profiles_.end())
    return i->second;
  auto offers = [&](const agent_id& id) {
    auto a = agents_.find(id);
    if (a == agents_.end() || a->second.spec.profiles.empty())
      return opts_.profiles;
    return a->second.spec.profiles;
  };
  auto a = offers(src);
  auto b = offers(dst);
  return profiles_.emplace(key, pps::negotiate(a, b)).first->second;
}

void runtime::enqueue(const message& msg, const agent_id& to, tick due) {
  const auto& profile = link_profile(msg.src, to);
  pending p{to, pps::encode(msg, profile), profile,
            timer_send_ || is_housekeeping(msg.dst)};
  if (profile.reliability == pps::reliability::at_most_once && opts_.drop
      && opts_.drop(msg)) {
    bus_log_.push_back("dropped " + std::to_string(msg.msg_id));
    return;
  }
  bool twice = profile.reliability == pps::reliability::at_least_once
               && opts_.duplicate && opts_.duplicate(msg);
  if (twice)
    queue_.emplace(std::pair{due, queue_seq_++}, p);
  queue_.emplace(std::pair{due, queue_seq_++}, std::move(p));
}

void runtime::route(message msg, tick due) {
  if (auto id = std::get_if<agent_id>(&msg.dst)) {
    enqueue(msg, *id, due);
    return;
  }
  event ev{std::get<topic>(msg.dst).name, datum{}, msg.src,
           ++publish_seq_[msg.src], msg.sim_time};
  for (auto& to : brokers_.route(ev))
    enqueue(msg, to, due);
}

void runtime::send(message msg) {
  route(std::move(msg), now_ + 1);
}

void runtime::inject(message msg) {
  route(std::move(msg), now_);
}

void runtime::deliver_due() {
  while (!queue_.empty() && queue_.begin()->first.first <= now_) {
    auto node = queue_.extract(queue_.begin());
    auto& p = node.mapped();
    auto to = p.to;
    for (auto a = alias_.find(to); a != alias_.end(); a = alias_.find(to))
      to = a->second;
    auto target = agents_.find(to);
    if (target == agents_.end())
      continue;
    if (target->second.crashed) {
      dead_letters_[to].push_back(std::move(p));
      continue;
    }
    if (!target->second.live)
      continue;
    message msg;
    try {
      msg = pps::decode(p.frame, p.profile);
    } catch (const error& ex) {
      bus_log_.push_back(std::string{"undecodable frame: "} + ex.what());
      continue;
    }
    ++delivered_;
    std::vector<message> out;
    try {
      out = process_input(to, msg);
    } catch (const error& ex) {
      bus_log_.push_back(to_string(to) + " rejected "
                         + std::to_string(msg.msg_id) + ": " + ex.what());
      continue;
    }
    for (auto& m : out)
      send(std::move(m));
  }
}

void runtime::end_tick() {
  if (opts_.heartbeat_interval > 0 && now_ % opts_.heartbeat_interval == 0)
    for (auto& [id, st] : agents_)
      if (st.live)
        send(make(id, topic{"control.heartbeat"}, message_kind::event,
                  datum{{"op", "heartbeat"}, {"agent", to_string(id)}}));
  timer_send_ = true;
  for (auto& [id, st] : agents_) {
    if (!st.live)
      continue;
    auto& subs = st.spec.subscriptions;
    if (std::find(subs.begin(), subs.end(), "control.tick") != subs.end())
      send(make(id, id, message_kind::event,
                datum{{"op", "tick"}, {"now", now_ + 1}}));
  }
  timer_send_ = false;
  ++now_;
}

bool runtime::quiescent() const {
  for (auto& [key, p] : queue_)
    if (!p.housekeeping)
      return false;
  for (auto& [id, held] : dead_letters_)
    for (auto& p : held)
      if (!p.housekeeping)
        return false;
  return true;
}

} // namespace agentnet
