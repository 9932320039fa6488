#include "agentnet/pps.hpp"

#include <algorithm>
#include <charconv>

#include "agentnet/error.hpp"

namespace agentnet::pps {

namespace {

class writer {
public:
  void u8(std::uint8_t x) {
    buf_.push_back(x);
  }

  void u16(std::uint16_t x) {
    put(x, 2);
  }

  void u32(std::uint32_t x) {
    put(x, 4);
  }

  void u64(std::uint64_t x) {
    put(x, 8);
  }

  void raw(std::span<const std::uint8_t> data) {
    buf_.insert(buf_.end(), data.begin(), data.end());
  }

  bytes take() {
    return std::move(buf_);
  }

  std::size_t size() const noexcept {
    return buf_.size();
  }

private:
  void put(std::uint64_t x, int width) {
    for (int i = width - 1; i >= 0; --i)
      buf_.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
  }

  bytes buf_;
};

class reader {
public:
  explicit reader(std::span<const std::uint8_t> data) : data_(data) {
  }

  std::uint8_t u8() {
    return static_cast<std::uint8_t>(get(1));
  }

  std::uint16_t u16() {
    return static_cast<std::uint16_t>(get(2));
  }

  std::uint32_t u32() {
    return static_cast<std::uint32_t>(get(4));
  }

  std::uint64_t u64() {
    return get(8);
  }

  std::span<const std::uint8_t> raw(std::size_t n) {
    need(n);
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  bool at_end() const noexcept {
    return pos_ == data_.size();
  }

private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n)
      throw error{errc::malformed_frame, "truncated frame"};
  }

  std::uint64_t get(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t x = 0;
    for (int i = 0; i < width; ++i)
      x = (x << 8) | data_[pos_++];
    return x;
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

void write_agent(writer& out, const agent_id& id) {
  out.u8(static_cast<std::uint8_t>(id.kind));
  out.u8(static_cast<std::uint8_t>(id.level));
  out.u32(id.instance);
}

agent_id read_agent(reader& in) {
  auto kind = in.u8();
  auto level = in.u8();
  auto instance = in.u32();
  if (kind >= std::size(all_function_kinds) || level > 3)
    throw error{errc::malformed_frame, "agent id out of range"};
  agent_id id{static_cast<function_kind>(kind), static_cast<gana_level>(level),
              instance};
  if (id.level != level_of(id.kind))
    throw error{errc::malformed_frame, "agent level mismatch"};
  return id;
}

bytes encode_binary(const message& msg) {
  writer body;
  body.u64(msg.msg_id);
  write_agent(body, msg.src);
  if (auto id = std::get_if<agent_id>(&msg.dst)) {
    body.u8(0);
    write_agent(body, *id);
  } else {
    auto& name = std::get<topic>(msg.dst).name;
    if (name.size() > 0xFFFF)
      throw error{errc::payload_too_large, "topic name too long"};
    body.u8(1);
    body.u16(static_cast<std::uint16_t>(name.size()));
    body.raw({reinterpret_cast<const std::uint8_t*>(name.data()), name.size()});
  }
  body.u8(static_cast<std::uint8_t>(msg.kind));
  body.u8(msg.correlation_id ? 1 : 0);
  if (msg.correlation_id)
    body.u64(*msg.correlation_id);
  body.u64(static_cast<std::uint64_t>(msg.sim_time));
  body.u32(static_cast<std::uint32_t>(msg.payload.size()));
  body.raw(msg.payload);
  writer frame;
  frame.u32(static_cast<std::uint32_t>(body.size()));
  frame.raw(body.take());
  return frame.take();
}

message decode_binary(std::span<const std::uint8_t> frame) {
  reader outer{frame};
  auto length = outer.u32();
  auto body_bytes = outer.raw(length);
  if (!outer.at_end())
    throw error{errc::malformed_frame, "trailing bytes after frame"};
  reader in{body_bytes};
  message msg;
  msg.msg_id = in.u64();
  msg.src = read_agent(in);
  switch (in.u8()) {
    case 0:
      msg.dst = read_agent(in);
      break;
    case 1: {
      auto n = in.u16();
      auto name = in.raw(n);
      msg.dst = topic{std::string(name.begin(), name.end())};
      break;
    }
    default:
      throw error{errc::malformed_frame, "bad destination tag"};
  }
  auto kind = in.u8();
  if (kind > 3)
    throw error{errc::malformed_frame, "bad message kind"};
  msg.kind = static_cast<message_kind>(kind);
  switch (in.u8()) {
    case 0:
      break;
    case 1:
      msg.correlation_id = in.u64();
      break;
    default:
      throw error{errc::malformed_frame, "bad correlation flag"};
  }
  msg.sim_time = static_cast<tick>(in.u64());
  auto n = in.u32();
  auto payload = in.raw(n);
  msg.payload.assign(payload.begin(), payload.end());
  if (!in.at_end())
    throw error{errc::malformed_frame, "trailing bytes in body"};
  return msg;
}

std::string to_hex(std::span<const std::uint8_t> data) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xF]);
  }
  return out;
}

bytes from_hex(const std::string& text) {
  if (text.size() % 2 != 0)
    throw error{errc::malformed_frame, "odd hex length"};
  bytes out(text.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto [ptr, ec] = std::from_chars(text.data() + 2 * i,
                                     text.data() + 2 * i + 2, out[i], 16);
    if (ec != std::errc{} || ptr != text.data() + 2 * i + 2)
      throw error{errc::malformed_frame, "bad hex digit"};
  }
  return out;
}

bytes encode_text(const message& msg) {
  datum doc;
  doc["msg_id"] = msg.msg_id;
  doc["src"] = to_string(msg.src);
  if (auto id = std::get_if<agent_id>(&msg.dst))
    doc["dst"] = {{"agent", to_string(*id)}};
  else
    doc["dst"] = {{"topic", std::get<topic>(msg.dst).name}};
  doc["kind"] = std::string{to_string(msg.kind)};
  doc["correlation_id"] = msg.correlation_id ? datum(*msg.correlation_id)
                                             : datum(nullptr);
  doc["sim_time"] = msg.sim_time;
  doc["payload"] = to_hex(msg.payload);
  auto text = doc.dump();
  return bytes(text.begin(), text.end());
}

message decode_text(std::span<const std::uint8_t> frame) {
  if (std::find(frame.begin(), frame.end(), 0) != frame.end())
    throw error{errc::malformed_frame, "NUL byte in text frame"};
  auto doc = datum::parse(frame.begin(), frame.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw error{errc::malformed_frame, "not a JSON object"};
  try {
    message msg;
    msg.msg_id = doc.at("msg_id").get<std::uint64_t>();
    auto src = parse_agent_id(doc.at("src").get<std::string>());
    if (!src)
      throw error{errc::malformed_frame, "bad src"};
    msg.src = *src;
    auto& dst = doc.at("dst");
    if (dst.contains("agent")) {
      auto id = parse_agent_id(dst.at("agent").get<std::string>());
      if (!id)
        throw error{errc::malformed_frame, "bad dst"};
      msg.dst = *id;
    } else {
      msg.dst = topic{dst.at("topic").get<std::string>()};
    }
    auto kind = parse_message_kind(doc.at("kind").get<std::string>());
    if (!kind)
      throw error{errc::malformed_frame, "bad kind"};
    msg.kind = *kind;
    auto& corr = doc.at("correlation_id");
    if (!corr.is_null())
      msg.correlation_id = corr.get<std::uint64_t>();
    msg.sim_time = doc.at("sim_time").get<tick>();
    msg.payload = from_hex(doc.at("payload").get<std::string>());
    return msg;
  } catch (const datum::exception& ex) {
    throw error{errc::malformed_frame, ex.what()};
  }
}

} // namespace

std::vector<stack_profile> common_profiles(std::span<const stack_profile> a,
                                           std::span<const stack_profile> b) {
  std::vector<stack_profile> out;
  for (auto& p : a)
    if (std::find(b.begin(), b.end(), p) != b.end()
        && std::find(out.begin(), out.end(), p) == out.end())
      out.push_back(p);
  return out;
}

stack_profile negotiate(std::span<const stack_profile> offered_a,
                        std::span<const stack_profile> offered_b) {
  auto common = common_profiles(offered_a, offered_b);
  if (common.empty())
    throw error{errc::no_common_profile, "offers are disjoint"};
  return common.front();
}

bytes encode(const message& msg, const stack_profile& profile) {
  if (msg.payload.size() > profile.max_payload)
    throw error{errc::payload_too_large,
                std::to_string(msg.payload.size()) + " > "
                  + std::to_string(profile.max_payload)};
  return profile.codec == codec::binary_length_prefixed ? encode_binary(msg)
                                                        : encode_text(msg);
}

message decode(std::span<const std::uint8_t> frame,
               const stack_profile& profile) {
  auto msg = profile.codec == codec::binary_length_prefixed
               ? decode_binary(frame)
               : decode_text(frame);
  if (msg.payload.size() > profile.max_payload)
    throw error{errc::malformed_frame, "payload exceeds profile bound"};
  return msg;
}

std::vector<stack_profile> default_profiles() {
  return {
    {"bin-reliable", codec::binary_length_prefixed, reliability::at_least_once,
     1u << 20},
    {"bin-fast", codec::binary_length_prefixed, reliability::at_most_once,
     1u << 20},
    {"json-debug", codec::text_structured, reliability::at_least_once,
     1u << 20},
  };
}

datum to_datum(const stack_profile& profile) {
  return datum{
    {"id", profile.id},
    {"codec", profile.codec == codec::binary_length_prefixed ? "binary"
                                                             : "text"},
    {"reliability", profile.reliability == reliability::at_least_once
                      ? "at_least_once"
                      : "at_most_once"},
    {"max_payload", profile.max_payload},
  };
}

stack_profile profile_from(const datum& value) {
  stack_profile p;
  p.id = value.at("id").get<std::string>();
  auto codec_name = value.value("codec", std::string{"binary"});
  if (codec_name == "binary")
    p.codec = codec::binary_length_prefixed;
  else if (codec_name == "text")
    p.codec = codec::text_structured;
  else
    throw error{errc::schema_error, "unknown codec " + codec_name};
  auto rel = value.value("reliability", std::string{"at_most_once"});
  if (rel == "at_least_once")
    p.reliability = reliability::at_least_once;
  else if (rel == "at_most_once")
    p.reliability = reliability::at_most_once;
  else
    throw error{errc::schema_error, "unknown reliability " + rel};
  p.max_payload = value.value("max_payload", std::size_t{1u << 20});
  if (p.max_payload == 0)
    throw error{errc::schema_error, "max_payload must be positive"};
  return p;
}

} // namespace agentnet::pps
