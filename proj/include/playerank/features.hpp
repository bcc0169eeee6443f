#pragma once

// Per-player and per-team performance vectors, outcome labels and the
// training-set builder.

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "playerank/error.hpp"
#include "playerank/event_model.hpp"

namespace playerank {

/// Sparse feature -> count map. Stored counts are always >= 1.
class PerformanceVector {
 public:
  using Map = std::map<FeatureKey, long>;

  PerformanceVector() = default;
  PerformanceVector(std::initializer_list<std::pair<const std::string, long>> init) {
    for (const auto& [k, c] : init) add(FeatureKey(k), c);
  }

  void add(const FeatureKey& key, long count = 1) {
    if (count <= 0) return;
    entries_[key] += count;
  }

  void add(const PerformanceVector& other) {
    for (const auto& [k, c] : other.entries_) entries_[k] += c;
  }

  long count(const FeatureKey& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second;
  }
  long count(std::string_view key) const { return count(FeatureKey(std::string(key))); }

  /// Removes every key equal to or component-extending an ablation entry.
  void ablate(const std::set<std::string>& prefixes) {
    if (prefixes.empty()) return;
    std::erase_if(entries_, [&](const auto& kv) {
      for (const auto& p : prefixes) {
        if (kv.first.has_component_prefix(p)) return true;
      }
      return false;
    });
  }

  const Map& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }

  bool operator==(const PerformanceVector&) const = default;

 private:
  Map entries_;
};

enum class OutcomeLabel { kWin = 1, kLoss = -1, kDraw = 0 };

inline std::string_view to_string(OutcomeLabel o) {
  switch (o) {
    case OutcomeLabel::kWin: return "Win";
    case OutcomeLabel::kLoss: return "Loss";
    case OutcomeLabel::kDraw: return "Draw";
  }
  return "?";
}

inline PerformanceVector player_vector(const MatchRecord& m, std::string_view player_id) {
  if (!m.team_of(player_id)) {
    throw Error(ErrorCode::kUnknownPlayer,
                "player " + std::string(player_id) + " not in match " + m.match_id);
  }
  PerformanceVector v;
  for (const auto& e : m.events) {
    if (e.player_id != player_id) continue;
    for (const auto& k : explode_features(e)) v.add(k);
  }
  return v;
}

inline void require_team(const MatchRecord& m, std::string_view team_id) {
  if (!m.has_team(team_id)) {
    throw Error(ErrorCode::kUnknownTeam,
                "team " + std::string(team_id) + " not in match " + m.match_id);
  }
}

inline PerformanceVector team_vector(const MatchRecord& m, std::string_view team_id) {
  require_team(m, team_id);
  PerformanceVector v;
  for (const auto& p : m.players_of(team_id)) v.add(player_vector(m, p));
  return v;
}

inline OutcomeLabel outcome_label(const MatchRecord& m, std::string_view team_id) {
  require_team(m, team_id);
  const bool home = team_id == m.home_team_id;
  const int gf = home ? m.goals_home : m.goals_away;
  const int ga = home ? m.goals_away : m.goals_home;
  if (gf > ga) return OutcomeLabel::kWin;
  if (gf < ga) return OutcomeLabel::kLoss;
  return OutcomeLabel::kDraw;
}

struct TrainingRow {
  PerformanceVector vector;
  int label = 0;  // +1 win, -1 loss
};

/// Two rows per decisive match (home first); draws are skipped.
inline std::vector<TrainingRow> build_training_set(const std::vector<MatchRecord>& corpus,
                                                   const std::set<std::string>& ablation = {}) {
  std::vector<TrainingRow> rows;
  for (const auto& m : corpus) {
    if (m.goals_home == m.goals_away) continue;
    for (const auto* team : {&m.home_team_id, &m.away_team_id}) {
      TrainingRow r;
      r.vector = team_vector(m, *team);
      r.vector.ablate(ablation);
      r.label = static_cast<int>(outcome_label(m, *team));
      rows.push_back(std::move(r));
    }
  }
  if (rows.empty()) {
    throw Error(ErrorCode::kEmptyTrainingSet, "no decisive matches in corpus");
  }
  return rows;
}

}  // namespace playerank
