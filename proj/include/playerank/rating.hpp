#pragma once

// Player match scores, season ratings and score histograms.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "playerank/error.hpp"
#include "playerank/features.hpp"
#include "playerank/weight_model.hpp"

namespace playerank {

/// Weighted sum of scaled counts; the intercept is not part of a score.
inline double match_score(const PerformanceVector& v, const WeightModel& model) {
  double s = 0.0;
  for (const auto& [k, c] : v.entries()) {
    auto it = model.weights.find(k);
    if (it == model.weights.end()) continue;
    s += it->second * model.scaler.scale(k, static_cast<double>(c));
  }
  return s;
}

struct MatchScore {
  std::string player_id;
  std::string match_id;
  std::string season_id;
  double score = 0.0;
};

struct PlayerRating {
  std::string player_id;
  std::vector<std::string> season_ids;
  double rating = 0.0;
  int matches_counted = 0;
};

inline PlayerRating season_rating(const std::vector<MatchScore>& scores) {
  if (scores.empty()) throw Error(ErrorCode::kNoMatches, "no match scores");
  PlayerRating r;
  r.player_id = scores.front().player_id;
  double sum = 0.0;
  std::set<std::string> seasons;
  for (const auto& s : scores) {
    if (s.player_id != r.player_id) {
      throw Error(ErrorCode::kInvalidArgument, "scores belong to different players");
    }
    sum += s.score;
    if (!s.season_id.empty()) seasons.insert(s.season_id);
  }
  r.rating = sum / static_cast<double>(scores.size());
  r.matches_counted = static_cast<int>(scores.size());
  r.season_ids.assign(seasons.begin(), seasons.end());
  return r;
}

/// Scores of every appearing player in every match, ordered by
/// (player_id, match_id).
inline std::vector<MatchScore> score_matches(const std::vector<MatchRecord>& corpus,
                                             const WeightModel& model) {
  std::vector<MatchScore> out;
  for (const auto& m : corpus) {
    for (const auto* team : {&m.home_team_id, &m.away_team_id}) {
      for (const auto& p : m.players_of(*team)) {
        out.push_back({p, m.match_id, m.season_id, match_score(player_vector(m, p), model)});
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const MatchScore& a, const MatchScore& b) {
    return std::tie(a.player_id, a.match_id) < std::tie(b.player_id, b.match_id);
  });
  return out;
}

/// Ratings for every player appearing in `corpus`, optionally restricted to
/// `seasons`.
inline std::map<std::string, PlayerRating> rate_players(const std::vector<MatchRecord>& corpus,
                                                        const WeightModel& model,
                                                        const std::set<std::string>& seasons = {}) {
  std::vector<MatchRecord> selected;
  for (const auto& m : corpus) {
    if (seasons.empty() || seasons.contains(m.season_id)) selected.push_back(m);
  }
  std::map<std::string, std::vector<MatchScore>> by_player;
  for (auto& s : score_matches(selected, model)) by_player[s.player_id].push_back(std::move(s));
  std::map<std::string, PlayerRating> out;
  for (const auto& [p, scores] : by_player) out.emplace(p, season_rating(scores));
  return out;
}

struct HistogramBin {
  double lo = 0.0;
  long count = 0;
  bool operator==(const HistogramBin&) const = default;
};

/// Non-empty half-open bins [lo, lo + width) anchored at 0, ascending.
inline std::vector<HistogramBin> score_distribution(const std::vector<double>& scores,
                                                    double bin_width) {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
    throw Error(ErrorCode::kInvalidArgument, "bin width must be positive");
  }
  std::map<long long, long> bins;
  for (double s : scores) ++bins[static_cast<long long>(std::floor(s / bin_width))];
  std::vector<HistogramBin> out;
  out.reserve(bins.size());
  for (const auto& [idx, c] : bins) out.push_back({static_cast<double>(idx) * bin_width, c});
  return out;
}

inline nlohmann::ordered_json rating_to_json(const PlayerRating& r) {
  nlohmann::ordered_json j;
  j["player_id"] = r.player_id;
  j["rating"] = r.rating;
  j["matches_counted"] = r.matches_counted;
  j["season_ids"] = r.season_ids;
  return j;
}

inline void write_ratings(std::ostream& os, const std::map<std::string, PlayerRating>& ratings) {
  for (const auto& [p, r] : ratings) os << rating_to_json(r).dump() << '\n';
}

inline std::map<std::string, PlayerRating> read_ratings(std::istream& in) {
  std::map<std::string, PlayerRating> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    try {
      if (j.is_discarded()) throw std::runtime_error("invalid JSON");
      PlayerRating r;
      r.player_id = j.at("player_id").get<std::string>();
      r.rating = j.at("rating").get<double>();
      r.matches_counted = j.at("matches_counted").get<int>();
      r.season_ids = j.value("season_ids", std::vector<std::string>{});
      if (r.matches_counted < 1) throw std::runtime_error("matches_counted < 1");
      out[r.player_id] = std::move(r);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kMalformedLine,
                  "ratings line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace playerank
