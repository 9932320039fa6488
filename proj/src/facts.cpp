#include "agentnet/facts.hpp"

namespace agentnet {

std::uint64_t facts_store::write(const std::string& key, datum value,
                                 tick now) {
  auto& e = entries_[key];
  e.value = std::make_shared<const datum>(std::move(value));
  e.version += 1;
  e.updated_at = now;
  ++writes_;
  return e.version;
}

const datum* facts_store::get(const std::string& key) const {
  auto i = entries_.find(key);
  return i == entries_.end() ? nullptr : i->second.value.get();
}

datum facts_store::value_or(const std::string& key, datum fallback) const {
  auto v = get(key);
  return v ? *v : std::move(fallback);
}

std::uint64_t facts_store::version(const std::string& key) const {
  auto i = entries_.find(key);
  return i == entries_.end() ? 0 : i->second.version;
}

datum facts_store::to_datum() const {
  datum out = datum::object();
  for (auto& [key, e] : entries_)
    out[key] = {{"value", *e.value},
                {"version", e.version},
                {"updated_at", e.updated_at}};
  return out;
}

datum facts_store::values() const {
  datum out = datum::object();
  for (auto& [key, e] : entries_)
    out[key] = *e.value;
  return out;
}

facts_store facts_store::from_values(const datum& values, tick now) {
  facts_store out;
  for (auto& [key, value] : values.items())
    out.write(key, value, now);
  return out;
}

} // namespace agentnet
