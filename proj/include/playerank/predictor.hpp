#pragma once

// Team match quality from prior player ratings, superior/similar
// classification and outcome-predictor evaluation.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "playerank/error.hpp"
#include "playerank/event_model.hpp"
#include "playerank/io.hpp"
#include "playerank/rating.hpp"

namespace playerank {

inline constexpr double kDefaultSimilarityEpsilon = 1e-4;
inline constexpr double kDefaultUpsetGap = 0.2;

using RatingTable = std::map<std::string, PlayerRating>;

struct TeamQuality {
  std::string match_id;
  std::string team_id;
  double quality = 0.0;
  int players_counted = 0;
};

namespace detail {

// A rating built from the evaluated match's own season would leak the
// outcome, so it counts as missing.
inline const PlayerRating* usable_rating(const RatingTable& ratings, const std::string& player,
                                         const std::string& season) {
  auto it = ratings.find(player);
  if (it == ratings.end()) return nullptr;
  const auto& seasons = it->second.season_ids;
  if (std::find(seasons.begin(), seasons.end(), season) != seasons.end()) return nullptr;
  return &it->second;
}

}  // namespace detail

/// Mean prior rating over every player who appeared for the team.
inline TeamQuality team_quality(const MatchRecord& m, std::string_view team_id,
                                const RatingTable& ratings) {
  if (!m.has_team(team_id)) {
    throw Error(ErrorCode::kUnknownTeam,
                "team " + std::string(team_id) + " not in match " + m.match_id);
  }
  const auto players = m.players_of(team_id);
  if (players.empty()) {
    throw Error(ErrorCode::kMissingRating, "team " + std::string(team_id) + " fielded nobody");
  }
  double sum = 0.0;
  for (const auto& p : players) {
    const auto* r = detail::usable_rating(ratings, p, m.season_id);
    if (!r) throw Error(ErrorCode::kMissingRating, p);
    sum += r->rating;
  }
  return {m.match_id, std::string(team_id), sum / static_cast<double>(players.size()),
          static_cast<int>(players.size())};
}

enum class PairRelation { kASuperior, kBSuperior, kSimilar };

inline PairRelation classify_pair(double qa, double qb,
                                  double epsilon = kDefaultSimilarityEpsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::kInvalidArgument, "epsilon must be positive");
  if (std::abs(qa - qb) < epsilon) return PairRelation::kSimilar;
  return qa > qb ? PairRelation::kASuperior : PairRelation::kBSuperior;
}

enum class MatchRelation { kHomeSuperior, kAwaySuperior, kSimilar };

inline std::string_view to_string(MatchRelation r) {
  switch (r) {
    case MatchRelation::kHomeSuperior: return "HomeSuperior";
    case MatchRelation::kAwaySuperior: return "AwaySuperior";
    case MatchRelation::kSimilar: return "Similar";
  }
  return "?";
}

struct PredictionRecord {
  std::string match_id;
  double quality_home = 0.0;
  double quality_away = 0.0;
  MatchRelation relation = MatchRelation::kSimilar;
  int goal_diff = 0;  // home - away
  bool correct = false;
};

/// Superior team won, or a similar pair drew.
inline bool prediction_correct(MatchRelation r, int goal_diff) {
  switch (r) {
    case MatchRelation::kHomeSuperior: return goal_diff > 0;
    case MatchRelation::kAwaySuperior: return goal_diff < 0;
    case MatchRelation::kSimilar: return goal_diff == 0;
  }
  return false;
}

inline PredictionRecord predict_match(const std::string& match_id, double quality_home,
                                      double quality_away, int goal_diff,
                                      double epsilon = kDefaultSimilarityEpsilon) {
  PredictionRecord rec;
  rec.match_id = match_id;
  rec.quality_home = quality_home;
  rec.quality_away = quality_away;
  switch (classify_pair(quality_home, quality_away, epsilon)) {
    case PairRelation::kASuperior: rec.relation = MatchRelation::kHomeSuperior; break;
    case PairRelation::kBSuperior: rec.relation = MatchRelation::kAwaySuperior; break;
    case PairRelation::kSimilar: rec.relation = MatchRelation::kSimilar; break;
  }
  rec.goal_diff = goal_diff;
  rec.correct = prediction_correct(rec.relation, goal_diff);
  return rec;
}

struct PredictorReport {
  double success_pct = 0.0;
  std::vector<PredictionRecord> records;  // corpus order
  long evaluated = 0;
  long skipped = 0;
};

inline PredictorReport evaluate_predictor(const std::vector<MatchRecord>& corpus,
                                          const RatingTable& ratings,
                                          double epsilon = kDefaultSimilarityEpsilon) {
  PredictorReport rep;
  long successes = 0;
  for (const auto& m : corpus) {
    TeamQuality home;
    TeamQuality away;
    try {
      home = team_quality(m, m.home_team_id, ratings);
      away = team_quality(m, m.away_team_id, ratings);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMissingRating) throw;
      ++rep.skipped;
      continue;
    }
    auto rec = predict_match(m.match_id, home.quality, away.quality,
                             m.goals_home - m.goals_away, epsilon);
    successes += rec.correct ? 1 : 0;
    rep.records.push_back(std::move(rec));
  }
  rep.evaluated = static_cast<long>(rep.records.size());
  if (rep.evaluated == 0) {
    throw Error(ErrorCode::kNothingEvaluable,
                std::to_string(rep.skipped) + " matches skipped for missing ratings");
  }
  rep.success_pct = 100.0 * static_cast<double>(successes) / static_cast<double>(rep.evaluated);
  return rep;
}

/// Fraction of matches with quality gap above `gap` won by the inferior side;
/// nullopt when no match qualifies.
inline std::optional<double> upset_rate(const std::vector<PredictionRecord>& records,
                                        double gap = kDefaultUpsetGap) {
  long qualifying = 0;
  long upsets = 0;
  for (const auto& r : records) {
    const double diff = r.quality_home - r.quality_away;
    if (!(std::abs(diff) > gap)) continue;
    ++qualifying;
    if ((diff > 0 && r.goal_diff < 0) || (diff < 0 && r.goal_diff > 0)) ++upsets;
  }
  if (qualifying == 0) return std::nullopt;
  return static_cast<double>(upsets) / static_cast<double>(qualifying);
}

inline int similar_goal_spread(const std::vector<PredictionRecord>& records) {
  int spread = 0;
  for (const auto& r : records) {
    if (r.relation == MatchRelation::kSimilar) spread = std::max(spread, std::abs(r.goal_diff));
  }
  return spread;
}

/// quality_diff (home - away), goal_diff, success flag; one row per record.
inline void write_scatter_csv(std::ostream& os, const std::vector<PredictionRecord>& records) {
  os << "quality_diff,goal_diff,success\n";
  for (const auto& r : records) {
    os << format_double(r.quality_home - r.quality_away) << ',' << r.goal_diff << ','
       << (r.correct ? 1 : 0) << '\n';
  }
}

inline nlohmann::ordered_json summary_json(const PredictorReport& rep,
                                           double gap = kDefaultUpsetGap) {
  nlohmann::ordered_json j;
  j["success_pct"] = rep.success_pct;
  j["evaluated"] = rep.evaluated;
  j["skipped"] = rep.skipped;
  if (auto u = upset_rate(rep.records, gap)) j["upset_rate"] = *u;
  else j["upset_rate"] = nullptr;
  j["similar_goal_spread"] = similar_goal_spread(rep.records);
  return j;
}

}  // namespace playerank
