#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "playerank/playerank.hpp"

namespace test_support {

inline std::filesystem::path data_dir() { return PLAYERANK_DATA_DIR; }
inline std::filesystem::path test_data_dir() { return PLAYERANK_TEST_DATA_DIR; }

inline playerank::MatchRecord fixture_match() {
  std::ifstream in(test_data_dir() / "fixture_match.jsonl");
  auto ms = playerank::parse_event_log(in);
  return ms.at(0);
}

inline playerank::WeightModel load_model(const std::filesystem::path& p) {
  std::ifstream in(p);
  return playerank::read_model(in);
}

inline playerank::EventRecord ev(std::string team, std::string player, int minute,
                                 std::string event, std::optional<std::string> sub = {},
                                 std::vector<std::string> tags = {}, int second = 0) {
  playerank::EventRecord e;
  e.match_id = "M";
  e.team_id = std::move(team);
  e.player_id = std::move(player);
  e.period = minute < 45 ? playerank::Period::kFirstHalf : playerank::Period::kSecondHalf;
  e.clock_s = (minute < 45 ? minute : minute - 45) * 60 + second;
  e.event_name = std::move(event);
  e.sub_event_name = std::move(sub);
  e.tags = std::move(tags);
  return e;
}

/// Model with identity scaling and the given weights.
inline playerank::WeightModel identity_model(const std::map<std::string, double>& weights) {
  playerank::WeightModel m;
  m.scaler = playerank::FeatureScaler::identity();
  for (const auto& [k, w] : weights) m.weights[playerank::FeatureKey(k)] = w;
  return m;
}

/// Small league shared by several suites.
inline playerank::synthetic::LeagueConfig small_league(std::uint64_t seed, int teams = 6, int seasons = 2) {
  playerank::synthetic::LeagueConfig cfg;
  cfg.teams = teams;
  cfg.seasons = seasons;
  cfg.event_intensity = 0.3;
  cfg.seed = seed;
  return cfg;
}

struct RandomSet {
  std::vector<playerank::TrainingRow> rows;
  double C = 1.0;
};

/// Small seeded classification problem: Poisson counts on up to 10
/// features, labels from a noisy random linear rule.
inline RandomSet random_training_set(int index) {
  playerank::synthetic::Rng rng(1000 + static_cast<std::uint64_t>(index));
  const int n = rng.uniform_int(20, 200);
  const int d = rng.uniform_int(2, 10);
  std::vector<double> truth(static_cast<std::size_t>(d));
  for (auto& v : truth) v = rng.normal();
  RandomSet out;
  for (int i = 0; i < n; ++i) {
    playerank::TrainingRow r;
    double f = 0.0;
    for (int k = 0; k < d; ++k) {
      const int c = rng.poisson(3.0);
      r.vector.add(playerank::FeatureKey("f" + std::to_string(k)), c);
      f += truth[static_cast<std::size_t>(k)] * (c - 3);
    }
    r.label = f + 2.0 * rng.normal() > 0 ? 1 : -1;
    out.rows.push_back(std::move(r));
  }
  static constexpr double kCs[] = {0.1, 1.0, 10.0};
  out.C = kCs[index % 3];
  return out;
}

inline playerank::svm::Problem scaled(const std::vector<playerank::TrainingRow>& rows) {
  std::vector<playerank::PerformanceVector> vs;
  for (const auto& r : rows) vs.push_back(r.vector);
  return playerank::scaled_problem(rows, playerank::feature_list(rows), playerank::fit_scaler(vs));
}

inline std::vector<playerank::TeamRoster> rosters_of(const playerank::MatchRecord& m) {
  return playerank::rosters_for_match(m);
}

inline std::vector<playerank::LiveSession::Entry> script_of(const playerank::MatchRecord& m) {
  return playerank::entries_for_match(m);
}

inline void feed(playerank::LiveSession& s, const std::vector<playerank::LiveSession::Entry>& script,
                 std::size_t from = 0, std::size_t to = static_cast<std::size_t>(-1)) {
  to = std::min(to, script.size());
  for (std::size_t i = from; i < to; ++i) {
    if (const auto* e = std::get_if<playerank::EventRecord>(&script[i])) {
      s.append_event(*e);
    } else {
      s.record_substitution(std::get<playerank::Substitution>(script[i]));
    }
  }
}

}  // namespace test_support
