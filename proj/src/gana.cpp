#include "agentnet/gana.hpp"

#include <algorithm>

#include "agentnet/error.hpp"
#include "agentnet/runtime.hpp"

namespace agentnet {

void check_policy_direction(const policy& p) {
  for (auto kind : p.scope)
    if (p.issuer_level <= level_of(kind))
      throw error{errc::invalid_direction,
                  std::string{to_string(p.issuer_level)} + " policy cannot "
                    + "govern " + std::string{to_string(kind)}};
}

std::size_t push_policy(runtime& rt, const policy& p) {
  check_policy_direction(p);
  if (p.scope.empty())
    return 0;
  auto live = rt.live_agents();
  auto issuer = agent_id::of(function_kind::orchestration, 0);
  for (auto k : all_function_kinds)
    if (level_of(k) == p.issuer_level) {
      issuer = agent_id::of(k, 0);
      break;
    }
  for (auto& id : live)
    if (id.level == p.issuer_level) {
      issuer = id;
      break;
    }
  std::size_t count = 0;
  for (auto& id : live) {
    if (p.scope.count(id.kind) == 0)
      continue;
    rt.send(rt.make(issuer, id, message_kind::policy, to_datum(p)));
    ++count;
  }
  return count;
}

std::optional<agent_id> select_upper(const agent_id& from,
                                     std::span<const agent_id> candidates) {
  if (from.level == gana_level::network)
    return std::nullopt;
  auto target = static_cast<gana_level>(static_cast<int>(from.level) + 1);
  auto preferred = target == gana_level::node      ? function_kind::fault
                   : target == gana_level::network ? function_kind::orchestration
                                                   : from.kind;
  std::optional<agent_id> best;
  auto rank = [&](const agent_id& id) {
    return std::tuple{id.kind != preferred, id.instance, id.kind};
  };
  for (auto& id : candidates) {
    if (id.level != target)
      continue;
    if (!best || rank(id) < rank(*best))
      best = id;
  }
  return best;
}

escalation_receipt escalate(runtime& rt, const escalation& esc) {
  if (esc.from.level == gana_level::network)
    throw error{errc::no_upper_agent, "no level above Network"};
  auto live = rt.live_agents();
  auto handler = select_upper(esc.from, live);
  if (!handler)
    throw error{errc::no_upper_agent,
                "no live agent above " + to_string(esc.from)};
  datum body{{"op", "escalation"},
             {"from", to_string(esc.from)},
             {"issue", esc.issue},
             {"raised_at", esc.raised_at}};
  auto msg = rt.make(esc.from, *handler, message_kind::request, body);
  auto id = msg.msg_id;
  rt.send(std::move(msg));
  return {*handler, id};
}

knowledge_view aggregate_view(std::span<const knowledge_view> contributions) {
  knowledge_view out;
  for (auto& view : contributions) {
    out.merged_at = std::max(out.merged_at, view.merged_at);
    for (auto& [node, entries] : view.nodes) {
      auto& target = out.nodes[node];
      for (auto& [key, entry] : entries) {
        auto [it, fresh] = target.try_emplace(key, entry);
        if (fresh)
          continue;
        auto& cur = it->second;
        if (entry.updated_at > cur.updated_at
            || (entry.updated_at == cur.updated_at
                && entry.value.dump() > cur.value.dump()))
          cur = entry;
      }
    }
  }
  return out;
}

datum to_datum(const knowledge_view& view) {
  datum nodes = datum::object();
  for (auto& [node, entries] : view.nodes) {
    datum e = datum::object();
    for (auto& [key, entry] : entries)
      e[key] = {{"value", entry.value}, {"updated_at", entry.updated_at}};
    nodes[node] = e;
  }
  return datum{{"nodes", nodes}, {"merged_at", view.merged_at}};
}

knowledge_view knowledge_view_from(const datum& value) {
  knowledge_view view;
  view.merged_at = value.value("merged_at", tick{0});
  for (auto& [node, entries] : value.at("nodes").items())
    for (auto& [key, entry] : entries.items())
      view.nodes[node][key] = view_entry{entry.at("value"),
                                         entry.at("updated_at").get<tick>()};
  return view;
}

} // namespace agentnet
