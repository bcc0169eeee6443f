#pragma once

// Seeded synthetic league generator. Team strength drives goal rates, goals
// decide outcomes, and the remaining events depend only weakly on player
// quality. Samplers are built on raw std::mt19937_64 output so a seed yields
// the same corpus with any standard library.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "playerank/event_model.hpp"

namespace playerank::synthetic {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  int uniform_int(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(uniform() * (hi - lo + 1));
  }

  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  int poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    if (lambda > 30.0) {
      return std::max(0, static_cast<int>(std::lround(lambda + std::sqrt(lambda) * normal())));
    }
    const double limit = std::exp(-lambda);
    int k = 0;
    double p = uniform();
    while (p > limit) {
      ++k;
      p *= uniform();
    }
    return k;
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 gen_;
};

enum class Role { kGoalkeeper, kDefender, kMidfielder, kForward };

struct PlayerProfile {
  std::string id;
  Role role = Role::kMidfielder;
  double skill = 0.0;
};

struct TeamProfile {
  std::string id;
  double strength = 0.0;
  std::vector<PlayerProfile> squad;  // first 11 are the usual starters
};

struct LeagueConfig {
  int teams = 20;
  int seasons = 2;
  int first_season = 2021;
  int squad_size = 16;
  int subs_per_match = 3;
  double event_intensity = 1.0;  // multiplies all non-goal event rates
  double strength_spread = 0.6;
  double assist_probability = 0.1;
  double base_goal_rate = 1.3;
  std::uint64_t seed = 0;
};

inline std::vector<TeamProfile> make_teams(const LeagueConfig& cfg, Rng& rng) {
  static constexpr std::array<Role, 11> kShape = {
      Role::kGoalkeeper, Role::kDefender,   Role::kDefender,   Role::kDefender,
      Role::kDefender,   Role::kMidfielder, Role::kMidfielder, Role::kMidfielder,
      Role::kForward,    Role::kForward,    Role::kForward};
  std::vector<TeamProfile> teams;
  for (int t = 0; t < cfg.teams; ++t) {
    TeamProfile team;
    team.id = "T" + std::string(t < 9 ? "0" : "") + std::to_string(t + 1);
    team.strength = cfg.strength_spread * rng.normal();
    for (int p = 0; p < cfg.squad_size; ++p) {
      PlayerProfile pl;
      pl.id = team.id + "P" + std::string(p < 9 ? "0" : "") + std::to_string(p + 1);
      pl.role = p < 11 ? kShape[static_cast<std::size_t>(p)]
                       : static_cast<Role>(1 + (p - 11) % 3);
      pl.skill = 0.5 * rng.normal();
      team.squad.push_back(std::move(pl));
    }
    teams.push_back(std::move(team));
  }
  return teams;
}

namespace detail {

struct EventSpec {
  const char* event;
  const char* sub;    // nullptr: none
  double rate;        // per 90 minutes for an average outfield player
  double quality_slope;
  double accuracy;    // <0: no accuracy tag
  std::array<double, 4> role_factor;  // GK, DEF, MID, FWD
};

// Non-goal background events. Rates are loosely shaped after real event
// frequencies; accuracy tags follow a logistic in player quality.
inline const std::vector<EventSpec>& event_specs() {
  static const std::vector<EventSpec> specs = {
      {"Pass", "Simple pass", 22.0, 0.10, 0.82, {0.8, 1.0, 1.3, 0.8}},
      {"Pass", "High pass", 3.0, 0.05, 0.55, {1.5, 1.3, 0.9, 0.5}},
      {"Pass", "Head pass", 1.5, 0.0, 0.60, {0.2, 1.4, 1.0, 0.8}},
      {"Pass", "Smart pass", 0.8, 0.15, 0.45, {0.0, 0.3, 1.5, 1.3}},
      {"Pass", "Cross", 1.0, 0.10, 0.35, {0.0, 1.0, 1.0, 1.2}},
      {"Duel", "Air duel", 3.0, 0.05, 0.50, {0.3, 1.5, 0.8, 1.2}},
      {"Duel", "Ground defending duel", 4.0, 0.05, 0.55, {0.1, 1.5, 1.2, 0.5}},
      {"Duel", "Ground attacking duel", 3.5, 0.05, 0.45, {0.0, 0.5, 1.2, 1.6}},
      {"Others on the ball", "Clearance", 1.5, 0.0, -1.0, {0.5, 2.5, 0.4, 0.1}},
      {"Others on the ball", "Touch", 2.0, 0.0, -1.0, {0.1, 0.6, 1.2, 1.5}},
      {"Foul", nullptr, 1.2, -0.05, -1.0, {0.1, 1.3, 1.1, 0.8}},
      {"Shot", "Shot", 1.0, 0.10, 0.40, {0.0, 0.3, 0.9, 2.2}},
      {"Free Kick", "Corner", 0.4, 0.0, 0.50, {0.0, 0.2, 1.5, 1.0}},
      {"Free Kick", "Free kick cross", 0.3, 0.0, 0.40, {0.0, 0.6, 1.4, 0.6}},
      {"Free Kick", "Free kick shot", 0.1, 0.0, 0.30, {0.0, 0.2, 1.2, 1.3}},
      {"Free Kick", "Goal kick", 0.5, 0.0, 0.70, {12.0, 0.0, 0.0, 0.0}},
  };
  return specs;
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double role_goal_weight(Role r) {
  switch (r) {
    case Role::kGoalkeeper: return 0.0;
    case Role::kDefender: return 0.35;
    case Role::kMidfielder: return 1.0;
    case Role::kForward: return 3.0;
  }
  return 1.0;
}

struct OnPitch {
  const PlayerProfile* player;
  int on_minute;
  int off_minute;
};

struct TimedEvent {
  int minute;
  int second;
  EventRecord event;
};

inline void set_clock(EventRecord& e, int minute, int second) {
  if (minute < 45) {
    e.period = Period::kFirstHalf;
    e.clock_s = minute * 60 + second;
  } else {
    e.period = Period::kSecondHalf;
    e.clock_s = (minute - 45) * 60 + second;
  }
}

inline std::vector<OnPitch> pick_lineup(const TeamProfile& team, const LeagueConfig& cfg, Rng& rng,
                                        std::vector<Appearance>& appearances) {
  std::vector<std::size_t> starters(11);
  for (std::size_t i = 0; i < 11; ++i) starters[i] = i;
  std::vector<std::size_t> bench;
  for (std::size_t i = 11; i < team.squad.size(); ++i) bench.push_back(i);
  // Occasional rotation of one outfield starter.
  if (!bench.empty() && rng.bernoulli(0.3)) {
    const auto s = static_cast<std::size_t>(rng.uniform_int(1, 10));
    const auto b = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(bench.size()) - 1));
    std::swap(starters[s], bench[b]);
  }
  std::vector<OnPitch> out;
  for (auto idx : starters) out.push_back({&team.squad[idx], 0, 90});
  const int subs = std::min<int>(cfg.subs_per_match, static_cast<int>(bench.size()));
  std::vector<std::size_t> off_slots;
  for (int s = 0; s < subs; ++s) {
    std::size_t slot;
    do {
      slot = static_cast<std::size_t>(rng.uniform_int(1, 10));
    } while (std::find(off_slots.begin(), off_slots.end(), slot) != off_slots.end());
    off_slots.push_back(slot);
    const int minute = rng.uniform_int(46, 85);
    out[slot].off_minute = minute;
    out.push_back({&team.squad[bench[static_cast<std::size_t>(s)]], minute, 90});
  }
  for (const auto& p : out) appearances.push_back({team.id, p.player->id, p.on_minute, p.off_minute});
  return out;
}

}  // namespace detail

/// One match between `home` and `away`.
inline MatchRecord generate_match(const std::string& match_id, const std::string& season_id,
                                  const TeamProfile& home, const TeamProfile& away,
                                  const LeagueConfig& cfg, Rng& rng) {
  using detail::TimedEvent;
  MatchRecord m;
  m.match_id = match_id;
  m.season_id = season_id;
  m.home_team_id = home.id;
  m.away_team_id = away.id;

  std::vector<TimedEvent> timeline;
  std::array<std::vector<detail::OnPitch>, 2> lineups = {
      detail::pick_lineup(home, cfg, rng, m.appearances),
      detail::pick_lineup(away, cfg, rng, m.appearances)};
  const std::array<const TeamProfile*, 2> sides = {&home, &away};

  auto make_event = [&](const TeamProfile& team, const PlayerProfile& p, int minute, int second,
                        const char* name, const char* sub, std::vector<std::string> tags) {
    EventRecord e;
    e.match_id = match_id;
    e.team_id = team.id;
    e.player_id = p.id;
    detail::set_clock(e, minute, second);
    e.event_name = name;
    if (sub) e.sub_event_name = sub;
    e.tags = std::move(tags);
    timeline.push_back({minute, second, std::move(e)});
  };

  // Background events.
  for (std::size_t side = 0; side < 2; ++side) {
    const auto& team = *sides[side];
    for (const auto& slot : lineups[side]) {
      const auto& p = *slot.player;
      const double quality = p.skill;  // team strength acts through goals only
      const double share = (slot.off_minute - slot.on_minute) / 90.0;
      for (const auto& spec : detail::event_specs()) {
        const double rate = spec.rate * spec.role_factor[static_cast<std::size_t>(p.role)] *
                            std::exp(spec.quality_slope * quality) * share * cfg.event_intensity;
        const int n = rng.poisson(rate);
        for (int k = 0; k < n; ++k) {
          const int minute = rng.uniform_int(slot.on_minute, slot.off_minute - 1);
          const int second = rng.uniform_int(0, 59);
          std::vector<std::string> tags;
          if (spec.accuracy >= 0.0) {
            const double pa = detail::logistic(std::log(spec.accuracy / (1.0 - spec.accuracy)) +
                                               0.3 * quality);
            tags.push_back(rng.bernoulli(pa) ? "accurate" : "not accurate");
          }
          const std::string_view sub = spec.sub ? spec.sub : "";
          if (std::string_view(spec.event) == "Pass" && rng.bernoulli(0.04 * std::exp(0.2 * quality))) {
            tags.push_back("key pass");
          }
          if (sub == "Touch") {
            const double u = rng.uniform();
            if (u < 0.15) tags.push_back("dangerous ball lost");
            else if (u < 0.30) tags.push_back("opportunity");
            else if (u < 0.40) tags.push_back("missed ball");
          }
          if (std::string_view(spec.event) == "Foul") {
            const double u = rng.uniform();
            if (u < 0.01) tags.push_back("red card");
            else if (u < 0.02) tags.push_back("second yellow card");
            else if (u < 0.15) tags.push_back("yellow card");
          }
          make_event(team, p, minute, second, spec.event, spec.sub, std::move(tags));
        }
      }
    }
  }

  // Goals: Poisson in the strength difference, scorer weighted by role.
  const double diff = home.strength - away.strength;
  const std::array<double, 2> goal_rate = {cfg.base_goal_rate * std::exp(0.1 + diff),
                                           cfg.base_goal_rate * std::exp(-0.1 - diff)};
  std::array<int, 2> goals = {0, 0};
  for (std::size_t side = 0; side < 2; ++side) {
    const auto& team = *sides[side];
    const int n = rng.poisson(goal_rate[side]);
    for (int g = 0; g < n; ++g) {
      const int minute = rng.uniform_int(0, 89);
      const int second = rng.uniform_int(0, 59);
      std::vector<const PlayerProfile*> on;
      std::vector<double> weight;
      double total = 0.0;
      for (const auto& slot : lineups[side]) {
        if (minute < slot.on_minute || minute >= slot.off_minute) continue;
        const double w = detail::role_goal_weight(slot.player->role) * std::exp(0.4 * slot.player->skill);
        on.push_back(slot.player);
        weight.push_back(w);
        total += w;
      }
      double u = rng.uniform() * total;
      std::size_t pick = 0;
      while (pick + 1 < on.size() && u >= weight[pick]) u -= weight[pick++];
      const auto& scorer = *on[pick];
      if (rng.bernoulli(cfg.assist_probability) && on.size() > 1) {
        std::size_t a;
        do {
          a = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(on.size()) - 1));
        } while (a == pick);
        static constexpr std::array<const char*, 4> kAssistPass = {"Simple pass", "High pass",
                                                                   "Cross", "Smart pass"};
        const char* sub = kAssistPass[static_cast<std::size_t>(rng.uniform_int(0, 3))];
        make_event(team, *on[a], minute, std::max(0, second - 2), "Pass", sub,
                   {"accurate", "assist"});
      }
      make_event(team, scorer, minute, second, "Goal", nullptr, {"Scored"});
      ++goals[side];
    }
  }
  m.goals_home = goals[0];
  m.goals_away = goals[1];

  std::stable_sort(timeline.begin(), timeline.end(), [](const TimedEvent& a, const TimedEvent& b) {
    return std::pair(a.minute, a.second) < std::pair(b.minute, b.second);
  });
  for (auto& t : timeline) m.events.push_back(std::move(t.event));
  return m;
}

/// Double round robin per season; squads and strengths persist across
/// seasons.
inline std::vector<MatchRecord> generate_league(const LeagueConfig& cfg) {
  Rng rng(cfg.seed);
  const auto teams = make_teams(cfg, rng);
  std::vector<MatchRecord> out;
  for (int s = 0; s < cfg.seasons; ++s) {
    const std::string season = std::to_string(cfg.first_season + s);
    int n = 0;
    for (std::size_t h = 0; h < teams.size(); ++h) {
      for (std::size_t a = 0; a < teams.size(); ++a) {
        if (h == a) continue;
        char id[32];
        std::snprintf(id, sizeof(id), "%s-%04d", season.c_str(), ++n);
        out.push_back(generate_match(id, season, teams[h], teams[a], cfg, rng));
      }
    }
  }
  return out;
}

}  // namespace playerank::synthetic
