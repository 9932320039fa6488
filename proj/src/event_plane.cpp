#include "agentnet/event_plane.hpp"

#include <algorithm>

#include "agentnet/error.hpp"

namespace agentnet {

std::string_view to_string(distribution_strategy strategy) noexcept {
  switch (strategy) {
    case distribution_strategy::centralized: return "centralized";
    case distribution_strategy::distributed: return "distributed";
    case distribution_strategy::hybrid: return "hybrid";
  }
  return "?";
}

distribution_strategy parse_strategy(std::string_view name) {
  for (auto s : {distribution_strategy::centralized,
                 distribution_strategy::distributed,
                 distribution_strategy::hybrid})
    if (to_string(s) == name)
      return s;
  throw error{errc::schema_error, "unknown event strategy " + std::string{name}};
}

bool valid_topic(std::string_view name) noexcept {
  if (name.empty() || name.front() == '.' || name.back() == '.')
    return false;
  char prev = 0;
  for (char c : name) {
    if (static_cast<unsigned char>(c) > 0x7F || c <= ' ')
      return false;
    if (c == '.' && prev == '.')
      return false;
    prev = c;
  }
  return true;
}

bool topic_matches(std::string_view filter, std::string_view topic) noexcept {
  while (true) {
    auto fdot = filter.find('.');
    auto fseg = filter.substr(0, fdot);
    if (fseg == "*" && fdot == std::string_view::npos)
      return !topic.empty();
    auto tdot = topic.find('.');
    auto tseg = topic.substr(0, tdot);
    if (fseg != tseg)
      return false;
    if (fdot == std::string_view::npos || tdot == std::string_view::npos)
      return fdot == std::string_view::npos && tdot == std::string_view::npos;
    filter.remove_prefix(fdot + 1);
    topic.remove_prefix(tdot + 1);
  }
}

broker_network::broker_network(distribution_strategy strategy,
                               std::size_t width)
  : strategy_(strategy) {
  switch (strategy) {
    case distribution_strategy::centralized:
      brokers_.resize(1);
      break;
    case distribution_strategy::distributed:
      brokers_.resize(std::max<std::size_t>(width, 1));
      break;
    case distribution_strategy::hybrid:
      brokers_.resize(5); // four levels plus the root
      break;
  }
}

int broker_network::home_of(const agent_id& agent) const {
  switch (strategy_) {
    case distribution_strategy::centralized:
      return 0;
    case distribution_strategy::distributed: {
      auto h = static_cast<std::size_t>(agent.kind) * 7919u + agent.instance;
      return static_cast<int>(h % brokers_.size());
    }
    case distribution_strategy::hybrid:
      return static_cast<int>(agent.level);
  }
  return 0;
}

std::uint64_t broker_network::subscribe(const agent_id& agent,
                                        std::string filter) {
  auto id = next_sub_++;
  brokers_[home_of(agent)].subs.push_back(
    subscription{id, agent, std::move(filter), next_stamp_++});
  return id;
}

void broker_network::unsubscribe(const agent_id& agent) {
  auto& subs = brokers_[home_of(agent)].subs;
  std::erase_if(subs, [&](auto& s) { return s.agent == agent; });
}

void broker_network::unsubscribe(std::uint64_t subscription) {
  for (auto& b : brokers_)
    std::erase_if(b.subs, [&](auto& s) { return s.id == subscription; });
}

void broker_network::publish(const event& ev) {
  channels_[{client, home_of(ev.publisher)}].push_back(
    envelope{ev, next_stamp_++});
}

void broker_network::receive(int at, int from, envelope env) {
  auto& b = brokers_[at];
  auto pub = env.ev.publisher;
  auto seq = env.ev.seq;
  auto [it, fresh] = b.next_expected.try_emplace(pub, 1);
  if (seq < it->second)
    return; // duplicate
  auto& held = b.held[pub];
  if (!held.try_emplace(seq, std::move(env)).second)
    return; // duplicate of a held event
  // Released events inherit the current sender as their origin hop. In the
  // full mesh the home broker reaches every peer directly, so skipping that
  // hop never starves a broker.
  while (true) {
    auto next = held.find(it->second);
    if (next == held.end())
      break;
    auto ready = std::move(next->second);
    held.erase(next);
    ++it->second;
    accept(at, from, ready);
  }
}

void broker_network::accept(int at, int from, const envelope& env) {
  auto& b = brokers_[at];
  std::set<agent_id> reached;
  for (auto& s : b.subs) {
    if (s.stamp >= env.stamp || !topic_matches(s.filter, env.ev.topic))
      continue;
    if (!reached.insert(s.agent).second)
      continue;
    deliveries_.push_back(
      delivery{s.agent, env.ev.publisher, env.ev.seq, env.ev.topic});
  }
  auto forward = [&](int to) { channels_[{at, to}].push_back(env); };
  switch (strategy_) {
    case distribution_strategy::centralized:
      break;
    case distribution_strategy::distributed:
      for (int to = 0; to < static_cast<int>(brokers_.size()); ++to)
        if (to != at && to != from)
          forward(to);
      break;
    case distribution_strategy::hybrid: {
      constexpr int root = 4;
      if (at == root) {
        for (int to = 0; to < root; ++to)
          if (to != from)
            forward(to);
      } else if (from == client) {
        forward(root);
      }
      break;
    }
  }
}

void broker_network::service(std::pair<int, int> channel) {
  auto& queue = channels_[channel];
  auto env = std::move(queue.front());
  queue.pop_front();
  if (queue.empty())
    channels_.erase(channel);
  receive(channel.second, channel.first, std::move(env));
}

bool broker_network::pump(std::mt19937_64& rng) {
  if (channels_.empty())
    return false;
  std::uniform_int_distribution<std::size_t> pick(0, channels_.size() - 1);
  auto it = std::next(channels_.begin(),
                      static_cast<std::ptrdiff_t>(pick(rng)));
  service(it->first);
  return true;
}

void broker_network::drain() {
  while (!channels_.empty())
    service(channels_.begin()->first);
}

std::vector<agent_id> broker_network::route(const event& ev) {
  publish(ev);
  drain();
  std::vector<agent_id> out;
  for (auto& d : deliveries_)
    out.push_back(d.subscriber);
  deliveries_.clear();
  return out;
}

std::vector<delivery> broker_network::take_deliveries() {
  return std::exchange(deliveries_, {});
}

delivery_log run_distribution(distribution_strategy strategy,
                              const std::vector<trace_op>& trace,
                              std::uint64_t seed) {
  broker_network net{strategy};
  std::mt19937_64 rng{seed};
  std::uniform_int_distribution<int> burst(0, 3);
  for (auto& op : trace) {
    if (auto sub = std::get_if<subscribe_op>(&op))
      net.subscribe(sub->agent, sub->filter);
    else
      net.publish(std::get<publish_op>(op).ev);
    for (int n = burst(rng); n > 0 && net.pump(rng); --n) {
      // interleave partial progress with the trace
    }
  }
  while (net.pump(rng)) {
  }
  delivery_log log;
  for (auto& d : net.take_deliveries())
    log[d.subscriber].emplace_back(d.publisher, d.seq);
  return log;
}

} // namespace agentnet
