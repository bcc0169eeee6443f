#pragma once

// Live match sessions: an append-only log of annotated events and
// substitutions, from which cumulative per-player scores are derived at every
// tick mark. The log text doubles as the durable store and replays to an
// identical session.

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "playerank/error.hpp"
#include "playerank/event_model.hpp"
#include "playerank/features.hpp"
#include "playerank/rating.hpp"
#include "playerank/weight_model.hpp"

namespace playerank {

inline constexpr int kDefaultTickMinutes = 5;
inline constexpr int kSessionLogVersion = 1;

struct RosterEntry {
  std::string player_id;
  std::string label;
  bool starting = false;
};

struct TeamRoster {
  std::string team_id;
  std::vector<RosterEntry> players;
};

struct Substitution {
  int minute = 0;
  std::string team_id;
  std::string off_player;
  std::string on_player;
  std::optional<Period> period;  // derived from minute when absent
};

/// Point on the match clock; ordered by period then seconds.
struct ClockPoint {
  Period period = Period::kFirstHalf;
  int clock_s = 0;

  auto operator<=>(const ClockPoint&) const = default;
};

/// Match minute an entry falls in for tick cutoffs. Stoppage time folds into
/// the last minute of its period (44 or 89).
inline int cutoff_minute(Period period, int clock_s) {
  const int m = std::min(clock_s / 60, 44);
  return period == Period::kSecondHalf ? 45 + m : m;
}

inline ClockPoint substitution_clock(const Substitution& s) {
  const Period p = s.period.value_or(s.minute < 45 ? Period::kFirstHalf : Period::kSecondHalf);
  const int offset = p == Period::kSecondHalf ? 45 : 0;
  return {p, std::max(0, s.minute - offset) * 60};
}

struct PlayerSnapshot {
  std::string player_id;
  std::string team_id;
  std::string label;
  double score = 0.0;
  bool on_pitch = false;
  bool fielded = false;

  bool operator==(const PlayerSnapshot&) const = default;
};

struct TeamSnapshot {
  std::string team_id;
  double mean_score = 0.0;
  int fielded = 0;

  bool operator==(const TeamSnapshot&) const = default;
};

struct SessionSnapshot {
  std::string session_id;
  int mark_minute = 0;
  std::vector<PlayerSnapshot> players;  // roster order, home team first
  std::vector<TeamSnapshot> teams;

  bool operator==(const SessionSnapshot&) const = default;
};

inline nlohmann::ordered_json snapshot_to_json(const SessionSnapshot& s) {
  nlohmann::ordered_json j;
  j["session_id"] = s.session_id;
  j["mark_minute"] = s.mark_minute;
  auto& players = j["players"] = nlohmann::ordered_json::array();
  for (const auto& p : s.players) {
    players.push_back({{"player_id", p.player_id},
                       {"team_id", p.team_id},
                       {"label", p.label},
                       {"score", p.score},
                       {"on_pitch", p.on_pitch},
                       {"fielded", p.fielded}});
  }
  auto& teams = j["teams"] = nlohmann::ordered_json::array();
  for (const auto& t : s.teams) {
    teams.push_back({{"team_id", t.team_id}, {"mean_score", t.mean_score}, {"fielded", t.fielded}});
  }
  return j;
}

class LiveSession {
 public:
  using Entry = std::variant<EventRecord, Substitution>;
  /// Receives each log line before the entry is applied. Throwing aborts the
  /// append and leaves the session unchanged.
  using LogSink = std::function<void(const std::string& line)>;

  LiveSession(std::string session_id, std::vector<TeamRoster> rosters,
              std::shared_ptr<const WeightModel> model, std::string model_id,
              int tick_minutes = kDefaultTickMinutes)
      : id_(std::move(session_id)),
        rosters_(std::move(rosters)),
        model_(std::move(model)),
        model_id_(std::move(model_id)),
        tick_(tick_minutes) {
    if (!model_) throw Error(ErrorCode::kUnknownModel, model_id_);
    if (tick_ <= 0) throw Error(ErrorCode::kInvalidArgument, "tick_minutes must be positive");
    if (rosters_.size() != 2) {
      throw Error(ErrorCode::kInvalidArgument, "exactly two team rosters are required");
    }
    if (rosters_[0].team_id.empty() || rosters_[0].team_id == rosters_[1].team_id) {
      throw Error(ErrorCode::kInvalidArgument, "team ids must be non-empty and distinct");
    }
    for (const auto& team : rosters_) {
      if (team.players.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "empty roster for " + team.team_id);
      }
      for (const auto& p : team.players) {
        if (p.player_id.empty()) throw Error(ErrorCode::kInvalidArgument, "empty player id");
        if (!team_of_.emplace(p.player_id, team.team_id).second) {
          throw Error(ErrorCode::kDuplicatePlayer, p.player_id);
        }
        if (p.starting) {
          on_pitch_.insert(p.player_id);
          used_.insert(p.player_id);
        }
      }
    }
  }

  const std::string& id() const noexcept { return id_; }
  const std::string& model_id() const noexcept { return model_id_; }
  const WeightModel& model() const noexcept { return *model_; }
  std::shared_ptr<const WeightModel> model_ptr() const noexcept { return model_; }
  int tick_minutes() const noexcept { return tick_; }
  const std::vector<TeamRoster>& rosters() const noexcept { return rosters_; }
  const std::vector<std::pair<long, Entry>>& entries() const noexcept { return entries_; }
  long last_seq() const noexcept { return static_cast<long>(entries_.size()); }
  ClockPoint clock() const noexcept { return clock_; }
  /// First mark at which everything recorded so far is visible.
  int clock_minute() const noexcept { return cutoff_minute(clock_.period, clock_.clock_s) + 1; }
  bool on_pitch(const std::string& player) const { return on_pitch_.contains(player); }

  void set_log_sink(LogSink sink) { sink_ = std::move(sink); }

  long append_event(EventRecord e) {
    auto team = team_of_.find(e.player_id);
    if (team == team_of_.end()) {
      throw Error(ErrorCode::kUnknownPlayer, e.player_id + " not on either roster");
    }
    if (e.team_id.empty()) e.team_id = team->second;
    if (e.team_id != team->second) {
      throw Error(ErrorCode::kUnknownPlayer, e.player_id + " does not play for " + e.team_id);
    }
    if (e.clock_s < 0 || e.clock_s >= kMaxPeriodSeconds) {
      throw Error(ErrorCode::kClockOutOfRange, std::to_string(e.clock_s));
    }
    (void)explode_features(e);  // rejects invalid names
    const std::set<std::string> unique(e.tags.begin(), e.tags.end());
    if (unique.size() != e.tags.size() || unique.contains("")) {
      throw Error(ErrorCode::kInvalidEvent, "tags must be non-empty and distinct");
    }
    const ClockPoint at{e.period, e.clock_s};
    if (at < clock_) throw Error(ErrorCode::kClockRegression, clock_text(at));
    if (!on_pitch_.contains(e.player_id)) throw Error(ErrorCode::kPlayerOffPitch, e.player_id);
    e.match_id = id_;

    const long seq = last_seq() + 1;
    emit(entry_json(seq, e));
    clock_ = at;
    entries_.emplace_back(seq, std::move(e));
    return seq;
  }

  long record_substitution(Substitution s) {
    if (s.minute < 0 || s.minute > kMaxMatchMinute) {
      throw Error(ErrorCode::kClockOutOfRange, "minute " + std::to_string(s.minute));
    }
    auto off_team = team_of_.find(s.off_player);
    auto on_team = team_of_.find(s.on_player);
    if (off_team == team_of_.end()) throw Error(ErrorCode::kUnknownPlayer, s.off_player);
    if (on_team == team_of_.end()) throw Error(ErrorCode::kUnknownPlayer, s.on_player);
    if (off_team->second != on_team->second) {
      throw Error(ErrorCode::kInvalidArgument, "substitution across teams");
    }
    if (s.team_id.empty()) s.team_id = off_team->second;
    if (s.team_id != off_team->second) {
      throw Error(ErrorCode::kUnknownPlayer, s.off_player + " does not play for " + s.team_id);
    }
    if (!s.period) s.period = substitution_clock(s).period;
    if (*s.period == Period::kSecondHalf && s.minute < 45) {
      throw Error(ErrorCode::kInvalidArgument, "second-half substitution before minute 45");
    }
    const ClockPoint at = substitution_clock(s);
    if (at < clock_) throw Error(ErrorCode::kClockRegression, clock_text(at));
    if (!on_pitch_.contains(s.off_player)) throw Error(ErrorCode::kNotOnPitch, s.off_player);
    if (used_.contains(s.on_player)) throw Error(ErrorCode::kAlreadyUsed, s.on_player);

    const long seq = last_seq() + 1;
    emit(entry_json(seq, s));
    clock_ = at;
    on_pitch_.erase(s.off_player);
    on_pitch_.insert(s.on_player);
    used_.insert(s.on_player);
    entries_.emplace_back(seq, std::move(s));
    return seq;
  }

  /// State at clock reading mark:00; entries from minute `mark` onward are
  /// not yet visible.
  SessionSnapshot snapshot(int mark) const {
    if (mark < 0) throw Error(ErrorCode::kInvalidArgument, "mark must be >= 0");
    std::map<std::string, PerformanceVector> counts;
    std::map<std::string, int> on_at;   // entry minute of substitutes
    std::map<std::string, int> off_at;  // exit minute
    for (const auto& [seq, entry] : entries_) {
      if (const auto* e = std::get_if<EventRecord>(&entry)) {
        if (cutoff_minute(e->period, e->clock_s) >= mark) continue;
        auto& v = counts[e->player_id];
        for (const auto& k : explode_features(*e)) v.add(k);
      } else {
        const auto& s = std::get<Substitution>(entry);
        const auto at = substitution_clock(s);
        off_at.emplace(s.off_player, cutoff_minute(at.period, at.clock_s));
        on_at.emplace(s.on_player, cutoff_minute(at.period, at.clock_s));
      }
    }

    SessionSnapshot snap;
    snap.session_id = id_;
    snap.mark_minute = mark;
    for (const auto& team : rosters_) {
      double sum = 0.0;
      int fielded = 0;
      for (const auto& p : team.players) {
        PlayerSnapshot ps;
        ps.player_id = p.player_id;
        ps.team_id = team.team_id;
        ps.label = p.label;
        auto c = counts.find(p.player_id);
        ps.score = c == counts.end() ? 0.0 : match_score(c->second, *model_);
        auto on = on_at.find(p.player_id);
        ps.fielded = p.starting || (on != on_at.end() && on->second < mark);
        auto off = off_at.find(p.player_id);
        ps.on_pitch = ps.fielded && (off == off_at.end() || off->second >= mark);
        if (ps.fielded) {
          sum += ps.score;
          ++fielded;
        }
        snap.players.push_back(std::move(ps));
      }
      snap.teams.push_back(
          {team.team_id, fielded > 0 ? sum / static_cast<double>(fielded) : 0.0, fielded});
    }
    return snap;
  }

  /// Snapshots at 0, tick, 2*tick, ... up to clock_minute().
  std::vector<SessionSnapshot> series() const {
    std::vector<SessionSnapshot> out;
    for (int mark = 0; mark <= clock_minute(); mark += tick_) out.push_back(snapshot(mark));
    return out;
  }

  /// The accumulated session as a batch match record (goals taken from
  /// "Goal" events).
  MatchRecord to_match_record() const {
    MatchRecord m;
    m.match_id = id_;
    m.home_team_id = rosters_[0].team_id;
    m.away_team_id = rosters_[1].team_id;
    std::map<std::string, int> on_at;
    std::map<std::string, int> off_at;
    for (const auto& [seq, entry] : entries_) {
      if (const auto* e = std::get_if<EventRecord>(&entry)) {
        m.events.push_back(*e);
        if (e->event_name == "Goal") (e->team_id == m.home_team_id ? m.goals_home : m.goals_away)++;
      } else {
        const auto& s = std::get<Substitution>(entry);
        off_at.emplace(s.off_player, s.minute);
        on_at.emplace(s.on_player, s.minute);
      }
    }
    for (const auto& team : rosters_) {
      for (const auto& p : team.players) {
        auto on = on_at.find(p.player_id);
        if (!p.starting && on == on_at.end()) continue;
        auto off = off_at.find(p.player_id);
        Appearance a{team.team_id, p.player_id, p.starting ? 0 : on->second,
                     off == off_at.end() ? 90 : off->second};
        a.off_minute = std::max(a.off_minute, a.on_minute + 1);
        m.appearances.push_back(std::move(a));
      }
    }
    return m;
  }

  // -- log format ----------------------------------------------------------

  std::string header_line() const {
    nlohmann::ordered_json j;
    j["kind"] = "header";
    j["format_version"] = kSessionLogVersion;
    j["session_id"] = id_;
    j["model_id"] = model_id_;
    j["tick_minutes"] = tick_;
    j["rosters"] = rosters_json(rosters_);
    j["model"] = model_to_json(*model_);
    return j.dump();
  }

  /// Header line followed by one line per entry, each newline-terminated.
  std::string export_log() const {
    std::string out = header_line() + '\n';
    for (const auto& [seq, entry] : entries_) {
      out += std::visit([&, s = seq](const auto& e) { return entry_json(s, e); }, entry);
      out += '\n';
    }
    return out;
  }

  static nlohmann::ordered_json rosters_json(const std::vector<TeamRoster>& rosters) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& t : rosters) {
      nlohmann::ordered_json team;
      team["team_id"] = t.team_id;
      auto& players = team["players"] = nlohmann::ordered_json::array();
      for (const auto& p : t.players) {
        players.push_back({{"player_id", p.player_id}, {"label", p.label}, {"starting", p.starting}});
      }
      arr.push_back(std::move(team));
    }
    return arr;
  }

  static std::vector<TeamRoster> rosters_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw Error(ErrorCode::kInvalidArgument, "rosters must be an array");
    std::vector<TeamRoster> out;
    try {
      for (const auto& t : j) {
        TeamRoster r;
        r.team_id = t.at("team_id").get<std::string>();
        for (const auto& p : t.at("players")) {
          RosterEntry e;
          e.player_id = p.at("player_id").get<std::string>();
          e.label = p.value("label", e.player_id);
          e.starting = p.value("starting", false);
          r.players.push_back(std::move(e));
        }
        out.push_back(std::move(r));
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument, std::string("rosters: ") + e.what());
    }
    return out;
  }

  static std::string entry_json(long seq, const EventRecord& e) {
    auto ev = event_to_json(e);
    ev.erase("kind");
    ev.erase("match_id");
    nlohmann::ordered_json j;
    j["seq"] = seq;
    j["kind"] = "event";
    j["event"] = std::move(ev);
    return j.dump();
  }

  static std::string entry_json(long seq, const Substitution& s) {
    nlohmann::ordered_json j;
    j["seq"] = seq;
    j["kind"] = "sub";
    j["minute"] = s.minute;
    j["period"] = to_string(s.period.value_or(substitution_clock(s).period));
    j["team_id"] = s.team_id;
    j["off_player"] = s.off_player;
    j["on_player"] = s.on_player;
    return j.dump();
  }

 private:
  void emit(const std::string& line) {
    if (sink_) sink_(line);
  }

  static std::string clock_text(ClockPoint at) {
    return std::string(to_string(at.period)) + " " + std::to_string(at.clock_s) + "s";
  }

  std::string id_;
  std::vector<TeamRoster> rosters_;
  std::shared_ptr<const WeightModel> model_;
  std::string model_id_;
  int tick_;
  std::map<std::string, std::string> team_of_;
  std::set<std::string> on_pitch_;
  std::set<std::string> used_;
  ClockPoint clock_;
  std::vector<std::pair<long, Entry>> entries_;
  LogSink sink_;
};

/// Parses an event body as accepted by the live API (event-log schema; kind
/// and match_id optional).
inline EventRecord event_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "event must be an object");
  try {
    return detail::parse_event_object(j, 0);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kMalformedLine) throw Error(ErrorCode::kInvalidEvent, e.detail());
    throw;
  }
}

inline Substitution substitution_from_json(const nlohmann::json& j) {
  Substitution s;
  try {
    s.minute = j.at("minute").get<int>();
    s.team_id = j.value("team_id", std::string());
    s.off_player = j.at("off_player").get<std::string>();
    s.on_player = j.at("on_player").get<std::string>();
    if (auto it = j.find("period"); it != j.end() && !it->is_null()) {
      s.period = parse_period(it->get<std::string>());
      if (!s.period) throw Error(ErrorCode::kInvalidArgument, "period must be 1H or 2H");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("substitution: ") + e.what());
  }
  return s;
}

struct ReplayResult {
  std::unique_ptr<LiveSession> session;
  std::size_t valid_bytes = 0;  // length of the accepted prefix
  bool dropped_torn_tail = false;
};

/// Rebuilds a session from its log text. With `allow_torn_tail`, a final line
/// lacking its newline (an append that was never acknowledged) is dropped
/// instead of reported.
inline ReplayResult replay_session(std::string_view text, bool allow_torn_tail = false) {
  ReplayResult out;
  std::size_t pos = 0;
  long expected = 0;
  auto corrupt = [&](const std::string& why) {
    return Error(ErrorCode::kCorruptLog, "seq " + std::to_string(expected) + ": " + why);
  };

  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const bool torn = nl == std::string_view::npos;
    std::string_view line = text.substr(pos, torn ? std::string_view::npos : nl - pos);
    if (torn && allow_torn_tail && expected > 0) {
      out.dropped_torn_tail = true;
      break;
    }
    if (torn) throw corrupt("truncated line");
    const std::size_t next = nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      pos = next;
      out.valid_bytes = pos;
      continue;
    }
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw corrupt("invalid JSON");

    if (expected == 0) {
      try {
        if (j.at("kind") != "header" || j.at("format_version") != kSessionLogVersion) {
          throw corrupt("bad header");
        }
        auto model = std::make_shared<const WeightModel>(model_from_json(j.at("model")));
        out.session = std::make_unique<LiveSession>(
            j.at("session_id").get<std::string>(), LiveSession::rosters_from_json(j.at("rosters")),
            std::move(model), j.value("model_id", std::string()), j.at("tick_minutes").get<int>());
      } catch (const nlohmann::json::exception& e) {
        throw corrupt(e.what());
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kCorruptLog) throw;
        throw corrupt(e.what());
      }
      expected = 1;
      pos = next;
      out.valid_bytes = pos;
      continue;
    }

    try {
      if (j.at("seq").get<long>() != expected) throw corrupt("sequence gap");
      const auto kind = j.at("kind").get<std::string>();
      long got = 0;
      if (kind == "event") {
        got = out.session->append_event(event_from_json(j.at("event")));
      } else if (kind == "sub") {
        got = out.session->record_substitution(substitution_from_json(j));
      } else {
        throw corrupt("unknown entry kind " + kind);
      }
      if (got != expected) throw corrupt("sequence mismatch");
    } catch (const nlohmann::json::exception& e) {
      throw corrupt(e.what());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kCorruptLog) throw;
      throw corrupt(e.what());
    }
    ++expected;
    pos = next;
    out.valid_bytes = pos;
  }
  if (!out.session) throw corrupt("missing header");
  return out;
}

/// Rosters covering everyone who appeared in `m`; starters are those on from
/// minute 0.
inline std::vector<TeamRoster> rosters_for_match(const MatchRecord& m) {
  std::vector<TeamRoster> out;
  for (const auto& team : {m.home_team_id, m.away_team_id}) {
    TeamRoster r{team, {}};
    for (const auto& a : m.appearances) {
      if (a.team_id == team) r.players.push_back({a.player_id, a.player_id, a.on_minute == 0});
    }
    out.push_back(std::move(r));
  }
  return out;
}

/// Events and substitutions of a recorded match in live entry order.
/// Substitutions pair an exit and an entry at the same minute within a team
/// and precede events at the same clock reading.
inline std::vector<LiveSession::Entry> entries_for_match(const MatchRecord& m) {
  std::vector<std::pair<ClockPoint, LiveSession::Entry>> timed;
  std::vector<bool> paired(m.appearances.size(), false);
  for (const auto& on : m.appearances) {
    if (on.on_minute == 0) continue;
    for (std::size_t i = 0; i < m.appearances.size(); ++i) {
      const auto& off = m.appearances[i];
      if (paired[i] || off.team_id != on.team_id || off.off_minute != on.on_minute) continue;
      paired[i] = true;
      Substitution s{on.on_minute, on.team_id, off.player_id, on.player_id, {}};
      timed.emplace_back(substitution_clock(s), s);
      break;
    }
  }
  for (const auto& e : m.events) timed.emplace_back(ClockPoint{e.period, e.clock_s}, e);
  std::stable_sort(timed.begin(), timed.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second.index() > b.second.index();
  });
  std::vector<LiveSession::Entry> out;
  out.reserve(timed.size());
  for (auto& [c, e] : timed) out.push_back(std::move(e));
  return out;
}

inline void apply_entries(LiveSession& s, const std::vector<LiveSession::Entry>& entries) {
  for (const auto& entry : entries) {
    if (const auto* e = std::get_if<EventRecord>(&entry)) s.append_event(*e);
    else s.record_substitution(std::get<Substitution>(entry));
  }
}

}  // namespace playerank
