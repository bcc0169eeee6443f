#pragma once

// Event taxonomy, canonical feature keys and the JSON-lines event-log format.

#include <algorithm>
#include <compare>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "playerank/error.hpp"

namespace playerank {

enum class Period { kFirstHalf, kSecondHalf };

inline std::string_view to_string(Period p) {
  return p == Period::kFirstHalf ? "1H" : "2H";
}

inline std::optional<Period> parse_period(std::string_view s) {
  if (s == "1H") return Period::kFirstHalf;
  if (s == "2H") return Period::kSecondHalf;
  return std::nullopt;
}

// A period never lasts an hour; anything beyond is a clock error.
inline constexpr int kMaxPeriodSeconds = 3600;
// Upper bound for appearance intervals (covers extra time).
inline constexpr int kMaxMatchMinute = 150;

/// Match minute of a clock reading: floor(clock_s / 60), plus 45 in the
/// second half.
inline int event_minute(Period period, int clock_s) {
  return clock_s / 60 + (period == Period::kSecondHalf ? 45 : 0);
}

struct EventRecord {
  std::string match_id;
  std::string team_id;
  std::string player_id;
  Period period = Period::kFirstHalf;
  int clock_s = 0;
  std::string event_name;
  std::optional<std::string> sub_event_name;
  std::vector<std::string> tags;

  int minute() const { return event_minute(period, clock_s); }

  bool operator==(const EventRecord&) const = default;
};

/// Canonical composite feature name, e.g. "Pass-High pass-assist".
class FeatureKey {
 public:
  FeatureKey() = default;
  explicit FeatureKey(std::string canonical) : canonical_(std::move(canonical)) {}

  const std::string& str() const noexcept { return canonical_; }

  /// First component ("Pass" for "Pass-High pass-assist").
  std::string_view event_component() const {
    std::string_view s = canonical_;
    return s.substr(0, s.find('-'));
  }

  /// True when this key equals `prefix` or extends it by whole components.
  bool has_component_prefix(std::string_view prefix) const {
    std::string_view s = canonical_;
    if (!s.starts_with(prefix)) return false;
    return s.size() == prefix.size() || s[prefix.size()] == '-';
  }

  auto operator<=>(const FeatureKey&) const = default;
  bool operator==(const FeatureKey&) const = default;

 private:
  std::string canonical_;
};

inline std::ostream& operator<<(std::ostream& os, const FeatureKey& k) {
  return os << k.str();
}

namespace detail {

inline bool valid_component(std::string_view s) {
  return s.find('-') == std::string_view::npos;
}

}  // namespace detail

/// Joins the non-empty components with "-". Components must not contain "-".
inline FeatureKey feature_key(std::string_view event_name,
                              std::optional<std::string_view> sub_event_name = std::nullopt,
                              std::optional<std::string_view> tag = std::nullopt) {
  if (event_name.empty()) {
    throw Error(ErrorCode::kInvalidEvent, "empty event name");
  }
  std::string out(event_name);
  if (!detail::valid_component(event_name)) {
    throw Error(ErrorCode::kInvalidEvent, "'-' in event name: " + out);
  }
  for (const auto& part : {sub_event_name, tag}) {
    if (!part || part->empty()) continue;
    if (!detail::valid_component(*part)) {
      throw Error(ErrorCode::kInvalidEvent, "'-' in component: " + std::string(*part));
    }
    out += '-';
    out += *part;
  }
  return FeatureKey(std::move(out));
}

/// Tag-less base key first, then one key per tag in input order.
inline std::vector<FeatureKey> explode_features(const EventRecord& e) {
  std::optional<std::string_view> sub;
  if (e.sub_event_name) sub = *e.sub_event_name;
  std::vector<FeatureKey> keys;
  keys.reserve(1 + e.tags.size());
  keys.push_back(feature_key(e.event_name, sub));
  for (const auto& t : e.tags) keys.push_back(feature_key(e.event_name, sub, t));
  return keys;
}

struct Appearance {
  std::string team_id;
  std::string player_id;
  int on_minute = 0;
  int off_minute = 90;

  bool operator==(const Appearance&) const = default;
};

struct MatchRecord {
  std::string match_id;
  std::string home_team_id;
  std::string away_team_id;
  int goals_home = 0;
  int goals_away = 0;
  std::string season_id;
  std::vector<Appearance> appearances;  // file order
  std::vector<EventRecord> events;      // file order

  bool has_team(std::string_view team_id) const {
    return team_id == home_team_id || team_id == away_team_id;
  }

  /// Distinct players who appeared for `team_id`, in first-appearance order.
  std::vector<std::string> players_of(std::string_view team_id) const {
    std::vector<std::string> out;
    for (const auto& a : appearances) {
      if (a.team_id == team_id &&
          std::find(out.begin(), out.end(), a.player_id) == out.end()) {
        out.push_back(a.player_id);
      }
    }
    return out;
  }

  /// Team of `player_id` in this match, if the player appeared.
  std::optional<std::string> team_of(std::string_view player_id) const {
    for (const auto& a : appearances) {
      if (a.player_id == player_id) return a.team_id;
    }
    return std::nullopt;
  }

  bool operator==(const MatchRecord&) const = default;
};

namespace detail {

using json = nlohmann::json;

[[noreturn]] inline void malformed(std::size_t line_no, const std::string& what) {
  throw Error(ErrorCode::kMalformedLine, "line " + std::to_string(line_no) + ": " + what);
}

inline std::string get_id(const json& j, const char* field, std::size_t line_no) {
  auto it = j.find(field);
  if (it == j.end()) malformed(line_no, std::string("missing field ") + field);
  if (it->is_string()) {
    auto s = it->get<std::string>();
    if (s.empty()) malformed(line_no, std::string("empty ") + field);
    return s;
  }
  // Integer ids (as served by some providers) are accepted and kept verbatim.
  if (it->is_number_integer()) return it->dump();
  malformed(line_no, std::string("bad type for ") + field);
}

inline int get_int(const json& j, const char* field, std::size_t line_no) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_number_integer()) {
    malformed(line_no, std::string("missing or non-integer ") + field);
  }
  return it->get<int>();
}

inline void check_name(const std::string& s, std::size_t line_no, const char* what) {
  if (!valid_component(s)) malformed(line_no, std::string("'-' in ") + what + ": " + s);
}

inline EventRecord parse_event_object(const json& j, std::size_t line_no) {
  EventRecord e;
  if (j.contains("match_id")) e.match_id = get_id(j, "match_id", line_no);
  e.team_id = get_id(j, "team_id", line_no);
  e.player_id = get_id(j, "player_id", line_no);
  auto pit = j.find("period");
  if (pit == j.end() || !pit->is_string()) malformed(line_no, "missing period");
  auto period = parse_period(pit->get<std::string>());
  if (!period) malformed(line_no, "period must be 1H or 2H");
  e.period = *period;
  e.clock_s = get_int(j, "clock_s", line_no);
  if (e.clock_s < 0 || e.clock_s >= kMaxPeriodSeconds) {
    throw Error(ErrorCode::kClockOutOfRange,
                "line " + std::to_string(line_no) + ": clock_s " + std::to_string(e.clock_s));
  }
  auto eit = j.find("event");
  if (eit == j.end() || !eit->is_string() || eit->get<std::string>().empty()) {
    malformed(line_no, "missing event name");
  }
  e.event_name = eit->get<std::string>();
  check_name(e.event_name, line_no, "event");
  if (auto sit = j.find("sub_event"); sit != j.end() && !sit->is_null()) {
    if (!sit->is_string()) malformed(line_no, "sub_event must be string or null");
    auto sub = sit->get<std::string>();
    check_name(sub, line_no, "sub_event");
    if (!sub.empty()) e.sub_event_name = std::move(sub);
  }
  if (auto tit = j.find("tags"); tit != j.end()) {
    if (!tit->is_array()) malformed(line_no, "tags must be an array");
    for (const auto& t : *tit) {
      if (!t.is_string()) malformed(line_no, "tag must be a string");
      auto tag = t.get<std::string>();
      if (tag.empty()) malformed(line_no, "empty tag");
      check_name(tag, line_no, "tag");
      if (std::find(e.tags.begin(), e.tags.end(), tag) != e.tags.end()) {
        malformed(line_no, "duplicate tag " + tag);
      }
      e.tags.push_back(std::move(tag));
    }
  }
  return e;
}

struct PendingMatch {
  MatchRecord record;
  std::size_t header_line = 0;
  std::vector<std::size_t> event_lines;
  std::vector<std::size_t> appearance_lines;
};

inline void validate_match(const PendingMatch& p) {
  const MatchRecord& m = p.record;
  for (std::size_t i = 0; i < m.appearances.size(); ++i) {
    const auto& a = m.appearances[i];
    const auto line = p.appearance_lines[i];
    if (!m.has_team(a.team_id)) malformed(line, "appearance for unknown team " + a.team_id);
    if (a.on_minute < 0 || a.on_minute >= a.off_minute || a.off_minute > kMaxMatchMinute) {
      malformed(line, "bad appearance interval for " + a.player_id);
    }
    for (std::size_t k = 0; k < i; ++k) {
      const auto& b = m.appearances[k];
      if (b.player_id != a.player_id) continue;
      if (b.team_id != a.team_id) malformed(line, "player " + a.player_id + " in both lineups");
      if (a.on_minute < b.off_minute && b.on_minute < a.off_minute) {
        malformed(line, "overlapping appearances for " + a.player_id);
      }
    }
  }
  for (std::size_t i = 0; i < m.events.size(); ++i) {
    const auto& e = m.events[i];
    auto team = m.team_of(e.player_id);
    if (!team || *team != e.team_id) {
      throw Error(ErrorCode::kUnknownPlayer,
                  "line " + std::to_string(p.event_lines[i]) + ": player " + e.player_id +
                      " not in lineup of team " + e.team_id + " in match " + m.match_id);
    }
  }
}

}  // namespace detail

/// Parses a JSON-lines event log. Any violation rejects the whole input.
inline std::vector<MatchRecord> parse_event_log(std::istream& in) {
  using detail::json;
  using detail::malformed;
  std::vector<MatchRecord> out;
  std::set<std::string> seen_ids;
  std::optional<detail::PendingMatch> cur;

  auto flush = [&] {
    if (!cur) return;
    detail::validate_match(*cur);
    out.push_back(std::move(cur->record));
    cur.reset();
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) malformed(line_no, "not a JSON object");
    auto kit = j.find("kind");
    if (kit == j.end() || !kit->is_string()) malformed(line_no, "missing kind");
    const auto kind = kit->get<std::string>();

    if (kind == "match") {
      flush();
      detail::PendingMatch p;
      p.header_line = line_no;
      auto& m = p.record;
      m.match_id = detail::get_id(j, "match_id", line_no);
      m.home_team_id = detail::get_id(j, "home_team_id", line_no);
      m.away_team_id = detail::get_id(j, "away_team_id", line_no);
      if (m.home_team_id == m.away_team_id) malformed(line_no, "home and away team are equal");
      m.goals_home = detail::get_int(j, "goals_home", line_no);
      m.goals_away = detail::get_int(j, "goals_away", line_no);
      if (m.goals_home < 0 || m.goals_away < 0) malformed(line_no, "negative goals");
      m.season_id = detail::get_id(j, "season_id", line_no);
      if (!seen_ids.insert(m.match_id).second) {
        malformed(line_no, "match " + m.match_id + " is not contiguous");
      }
      cur = std::move(p);
      continue;
    }
    if (!cur) malformed(line_no, kind + " line before any match line");
    if (detail::get_id(j, "match_id", line_no) != cur->record.match_id) {
      malformed(line_no, "match_id differs from enclosing match " + cur->record.match_id);
    }
    if (kind == "appearance") {
      Appearance a;
      a.team_id = detail::get_id(j, "team_id", line_no);
      a.player_id = detail::get_id(j, "player_id", line_no);
      a.on_minute = detail::get_int(j, "on_minute", line_no);
      a.off_minute = detail::get_int(j, "off_minute", line_no);
      cur->record.appearances.push_back(std::move(a));
      cur->appearance_lines.push_back(line_no);
    } else if (kind == "event") {
      auto e = detail::parse_event_object(j, line_no);
      cur->record.events.push_back(std::move(e));
      cur->event_lines.push_back(line_no);
    } else {
      malformed(line_no, "unknown kind " + kind);
    }
  }
  flush();
  return out;
}

inline std::vector<MatchRecord> parse_event_log(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_event_log(in);
}

inline nlohmann::ordered_json event_to_json(const EventRecord& e) {
  nlohmann::ordered_json j;
  j["kind"] = "event";
  j["match_id"] = e.match_id;
  j["team_id"] = e.team_id;
  j["player_id"] = e.player_id;
  j["period"] = to_string(e.period);
  j["clock_s"] = e.clock_s;
  j["event"] = e.event_name;
  j["sub_event"] = e.sub_event_name ? nlohmann::ordered_json(*e.sub_event_name)
                                    : nlohmann::ordered_json(nullptr);
  j["tags"] = e.tags;
  return j;
}

/// Inverse of parse_event_log.
inline void write_event_log(std::ostream& os, const std::vector<MatchRecord>& matches) {
  for (const auto& m : matches) {
    nlohmann::ordered_json h;
    h["kind"] = "match";
    h["match_id"] = m.match_id;
    h["home_team_id"] = m.home_team_id;
    h["away_team_id"] = m.away_team_id;
    h["goals_home"] = m.goals_home;
    h["goals_away"] = m.goals_away;
    h["season_id"] = m.season_id;
    os << h.dump() << '\n';
    for (const auto& a : m.appearances) {
      nlohmann::ordered_json j;
      j["kind"] = "appearance";
      j["match_id"] = m.match_id;
      j["team_id"] = a.team_id;
      j["player_id"] = a.player_id;
      j["on_minute"] = a.on_minute;
      j["off_minute"] = a.off_minute;
      os << j.dump() << '\n';
    }
    for (const auto& e : m.events) {
      auto j = event_to_json(e);
      j["match_id"] = m.match_id;
      os << j.dump() << '\n';
    }
  }
}

}  // namespace playerank
