#pragma once

// Independent reference computations used by the tests. These deliberately
// avoid the library's own code paths (no feature_key/explode_features, no
// SMO, no PerformanceVector arithmetic) so they can check them.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "playerank/event_model.hpp"
#include "playerank/linear_svm.hpp"
#include "playerank/rating.hpp"

namespace oracle {

using Counts = std::map<std::string, long>;

/// Single pass over the events, building composite names by hand.
inline Counts recount_player(const playerank::MatchRecord& m, const std::string& player) {
  Counts c;
  for (const auto& e : m.events) {
    if (e.player_id != player) continue;
    std::string base = e.event_name;
    if (e.sub_event_name && !e.sub_event_name->empty()) base += "-" + *e.sub_event_name;
    c[base] += 1;
    for (const auto& t : e.tags) c[base + "-" + t] += 1;
  }
  return c;
}

/// Team counts straight from the event list (no per-player decomposition).
inline Counts recount_team(const playerank::MatchRecord& m, const std::string& team) {
  Counts c;
  for (const auto& e : m.events) {
    if (e.team_id != team) continue;
    std::string base = e.event_name;
    if (e.sub_event_name && !e.sub_event_name->empty()) base += "-" + *e.sub_event_name;
    c[base] += 1;
    for (const auto& t : e.tags) c[base + "-" + t] += 1;
  }
  return c;
}

inline Counts to_counts(const playerank::PerformanceVector& v) {
  Counts c;
  for (const auto& [k, n] : v.entries()) c[k.str()] = n;
  return c;
}

/// Plain per-key loop over raw counts and a weight table (identity scaling).
inline double dot(const Counts& counts, const std::map<std::string, double>& weights) {
  double s = 0.0;
  for (const auto& [k, w] : weights) {
    auto it = counts.find(k);
    if (it != counts.end()) s += w * static_cast<double>(it->second);
  }
  return s;
}

/// Kahan-compensated mean.
inline double mean(const std::vector<double>& xs) {
  double sum = 0.0;
  double comp = 0.0;
  for (double x : xs) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum / static_cast<double>(xs.size());
}

// ---------------------------------------------------------------------------
// Hinge objective and a slow projected-subgradient solver.

inline double objective(const std::vector<double>& w, double b, const playerank::svm::Problem& p,
                        double C) {
  double reg = 0.0;
  for (double v : w) reg += v * v;
  double loss = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    double f = b;
    for (std::size_t k = 0; k < p.dim; ++k) f += w[k] * p.x[i * p.dim + k];
    loss += std::max(0.0, 1.0 - p.y[i] * f);
  }
  return 0.5 * reg + C * loss;
}

struct SubgradientResult {
  std::vector<double> w;
  double b = 0.0;
  double objective = std::numeric_limits<double>::infinity();
};

/// Projected subgradient descent on the primal with restarts from the best
/// iterate at geometrically shrinking step sizes. Iterates are projected onto
/// |w| <= sqrt(2 C n), the ball that must contain the optimum, and |b| <= B.
inline SubgradientResult subgradient_svm(const playerank::svm::Problem& p, double C,
                                         int rounds = 20, int steps_per_round = 4000) {
  const std::size_t n = p.rows();
  const std::size_t d = p.dim;
  const double radius = std::sqrt(2.0 * C * static_cast<double>(n));
  double xmax = 0.0;
  for (double v : p.x) xmax = std::max(xmax, std::abs(v));
  const double bias_bound = 1.0 + radius * xmax * std::sqrt(static_cast<double>(d));

  SubgradientResult best;
  best.w.assign(d, 0.0);
  best.objective = objective(best.w, 0.0, p, C);

  double step0 = 0.1 * (1.0 + radius);
  std::vector<double> w(d);
  std::vector<double> g(d);
  for (int r = 0; r < rounds; ++r) {
    w = best.w;
    double b = best.b;
    for (int t = 1; t <= steps_per_round; ++t) {
      g = w;
      double gb = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double f = b;
        for (std::size_t k = 0; k < d; ++k) f += w[k] * p.x[i * d + k];
        if (p.y[i] * f < 1.0) {
          for (std::size_t k = 0; k < d; ++k) g[k] -= C * p.y[i] * p.x[i * d + k];
          gb -= C * p.y[i];
        }
      }
      double gnorm = gb * gb;
      for (double v : g) gnorm += v * v;
      gnorm = std::sqrt(gnorm);
      if (gnorm == 0.0) break;
      const double eta = step0 / std::sqrt(static_cast<double>(t)) / gnorm;
      for (std::size_t k = 0; k < d; ++k) w[k] -= eta * g[k];
      b -= eta * gb;
      double wn = 0.0;
      for (double v : w) wn += v * v;
      wn = std::sqrt(wn);
      if (wn > radius) {
        for (double& v : w) v *= radius / wn;
      }
      b = std::clamp(b, -bias_bound, bias_bound);
      const double obj = objective(w, b, p, C);
      if (obj < best.objective) {
        best.objective = obj;
        best.w = w;
        best.b = b;
      }
    }
    step0 *= 0.5;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Predictor counting oracle.

struct PredictorCounts {
  long evaluated = 0;
  long skipped = 0;
  long successes = 0;
  long qualifying = 0;
  long upsets = 0;
  int spread = 0;
  double success_pct() const { return 100.0 * successes / evaluated; }
  std::optional<double> upset_rate() const {
    if (qualifying == 0) return std::nullopt;
    return static_cast<double>(upsets) / static_cast<double>(qualifying);
  }
};

inline PredictorCounts count_predictor(const std::vector<playerank::MatchRecord>& corpus,
                                       const std::map<std::string, playerank::PlayerRating>& ratings,
                                       double eps = 1e-4, double gap = 0.2) {
  PredictorCounts out;
  for (const auto& m : corpus) {
    double q[2] = {0.0, 0.0};
    bool ok = true;
    const std::string teams[2] = {m.home_team_id, m.away_team_id};
    for (int side = 0; side < 2 && ok; ++side) {
      std::vector<std::string> seen;
      double sum = 0.0;
      for (const auto& a : m.appearances) {
        if (a.team_id != teams[side]) continue;
        if (std::find(seen.begin(), seen.end(), a.player_id) != seen.end()) continue;
        seen.push_back(a.player_id);
        auto it = ratings.find(a.player_id);
        if (it == ratings.end()) { ok = false; break; }
        const auto& s = it->second.season_ids;
        if (std::find(s.begin(), s.end(), m.season_id) != s.end()) { ok = false; break; }
        sum += it->second.rating;
      }
      if (seen.empty()) ok = false;
      if (ok) q[side] = sum / static_cast<double>(seen.size());
    }
    if (!ok) { ++out.skipped; continue; }
    ++out.evaluated;
    const double dq = q[0] - q[1];
    const int dg = m.goals_home - m.goals_away;
    const bool similar = std::abs(dq) < eps;
    if (similar) {
      if (dg == 0) ++out.successes;
      out.spread = std::max(out.spread, std::abs(dg));
    } else if ((dq > 0 && dg > 0) || (dq < 0 && dg < 0)) {
      ++out.successes;
    }
    if (std::abs(dq) > gap) {
      ++out.qualifying;
      if ((dq > 0 && dg < 0) || (dq < 0 && dg > 0)) ++out.upsets;
    }
  }
  return out;
}

}  // namespace oracle
