#include "hrcplan/state_key.hpp"

#include <charconv>
#include <cstring>
#include <vector>

#include <fmt/format.h>

namespace hrc {

namespace {

void put16(std::string& out, int v) {
  const auto u = static_cast<std::uint16_t>(static_cast<std::int16_t>(v));
  out.push_back(static_cast<char>(u & 0xff));
  out.push_back(static_cast<char>(u >> 8));
}

int get16(std::string_view in, std::size_t& pos) {
  if (pos + 2 > in.size()) throw ConfigError("truncated state key");
  const auto lo = static_cast<std::uint8_t>(in[pos]);
  const auto hi = static_cast<std::uint8_t>(in[pos + 1]);
  pos += 2;
  return static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
}

constexpr char kTrit[3] = {'-', '0', '+'};

}  // namespace

std::string encode_state(const WorldState& s, const KeyOptions& opts) {
  const auto values = s.task.values();
  std::string out;
  out.reserve(2 + (values.size() + 3) / 4 + 10);
  put16(out, static_cast<int>(values.size()));
  std::uint8_t acc = 0;
  int bits = 0;
  for (auto v : values) {
    acc |= static_cast<std::uint8_t>((v + 1) << bits);
    bits += 2;
    if (bits == 8) {
      out.push_back(static_cast<char>(acc));
      acc = 0;
      bits = 0;
    }
  }
  if (bits) out.push_back(static_cast<char>(acc));
  put16(out, s.human_action);
  put16(out, s.t_h / std::max(1, opts.bucket_h));
  put16(out, s.t_r / std::max(1, opts.bucket_r));
  put16(out, s.robot_action);
  out.push_back(static_cast<char>((s.detected ? 1 : 0) | (s.human_waiting ? 2 : 0)));
  return out;
}

std::string describe_key(std::string_view key) {
  std::size_t pos = 0;
  const int n = get16(key, pos);
  std::string sa;
  for (int i = 0; i < n; ++i) {
    const std::size_t byte = pos + static_cast<std::size_t>(i / 4);
    if (byte >= key.size()) throw ConfigError("truncated state key");
    const int v = (static_cast<std::uint8_t>(key[byte]) >> ((i % 4) * 2)) & 3;
    if (v > 2) throw ConfigError("corrupt state key");
    sa.push_back(kTrit[v]);
  }
  pos += static_cast<std::size_t>((n + 3) / 4);
  const int h = get16(key, pos);
  const int th = get16(key, pos);
  const int tr = get16(key, pos);
  const int r = get16(key, pos);
  if (pos >= key.size()) throw ConfigError("truncated state key");
  const int flags = static_cast<std::uint8_t>(key[pos++]);
  std::string out = fmt::format("sa={}|h={}|w={}|th={}|tr={}|d={}|r={}", sa, h, (flags >> 1) & 1, th, tr, flags & 1, r);
  // Planner keys carry the hidden human choice while undetected.
  if (pos < key.size()) {
    const int hidden = get16(key, pos);
    out += fmt::format("|x={}", hidden);
    if (pos < key.size()) out += fmt::format("|j={}", static_cast<int>(key[pos++]));
  }
  if (pos != key.size()) throw ConfigError("trailing bytes in state key");
  return out;
}

std::string parse_key(std::string_view text) {
  auto fail = [&] { return ConfigError(fmt::format("malformed state key '{}'", text)); };
  std::vector<std::pair<std::string_view, std::string_view>> fields;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t bar = text.find('|', start);
    if (bar == std::string_view::npos) bar = text.size();
    auto part = text.substr(start, bar - start);
    auto eq = part.find('=');
    if (eq == std::string_view::npos) throw fail();
    fields.emplace_back(part.substr(0, eq), part.substr(eq + 1));
    start = bar + 1;
  }
  auto num = [&](std::string_view v) {
    int out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw fail();
    return out;
  };
  static constexpr const char* kOrder[] = {"sa", "h", "w", "th", "tr", "d", "r"};
  if (fields.size() < 7) throw fail();
  for (std::size_t i = 0; i < 7; ++i) {
    if (fields[i].first != kOrder[i]) throw fail();
  }
  WorldState s;
  std::vector<std::int8_t> sa;
  for (char c : fields[0].second) {
    const char* hit = static_cast<const char*>(std::memchr(kTrit, c, 3));
    if (!hit) throw fail();
    sa.push_back(static_cast<std::int8_t>(hit - kTrit - 1));
  }
  s.task = TaskState(std::move(sa));
  s.human_action = num(fields[1].second);
  s.human_waiting = num(fields[2].second) != 0;
  s.t_h = num(fields[3].second);
  s.t_r = num(fields[4].second);
  s.detected = num(fields[5].second) != 0;
  s.robot_action = num(fields[6].second);
  std::string key = encode_state(s);
  for (std::size_t i = 7; i < fields.size(); ++i) {
    if (fields[i].first == "x") put16(key, num(fields[i].second));
    else if (fields[i].first == "j") key.push_back(static_cast<char>(num(fields[i].second)));
    else throw fail();
  }
  return key;
}

}  // namespace hrc
