// Acceptance gate. One PASS/FAIL line per criterion; exit status is the
// number of failures.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "oracles.hpp"
#include "playerank/playerank.hpp"
#include "test_support.hpp"

using namespace playerank;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects the reasons a criterion failed.
struct Check {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

int failed = 0;

void report(const std::string& name, const std::function<std::string(Check&)>& body) {
  Check c;
  std::string info;
  try {
    info = body(c);
  } catch (const std::exception& e) {
    c.failures.push_back(std::string("exception: ") + e.what());
  }
  const bool ok = c.failures.empty();
  failed += ok ? 0 : 1;
  std::cout << (ok ? "PASS " : "FAIL ") << name;
  if (!info.empty()) std::cout << " (" << info << ")";
  std::cout << "\n";
  for (std::size_t i = 0; i < c.failures.size() && i < 10; ++i) {
    std::cout << "     " << c.failures[i] << "\n";
  }
  std::cout.flush();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double l2(const WeightModel& m) {
  double s = 0.0;
  for (const auto& [k, w] : m.weights) s += w * w;
  return std::sqrt(s);
}

std::string solver_oracle(Check& c) {
  double worst = 0.0;
  double solver_s = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto set = test_support::random_training_set(i);
    TrainConfig cfg;
    cfg.C = set.C;
    const auto t0 = Clock::now();
    const auto m = train(set.rows, cfg);
    solver_s += seconds_since(t0);
    const auto o = oracle::subgradient_svm(test_support::scaled(set.rows), set.C);
    const double rel = std::abs(m.stats.objective - o.objective) / o.objective;
    worst = std::max(worst, rel);
    c.expect(rel <= 1e-4, "set " + std::to_string(i) + " relative gap " + fmt(rel));
  }

  std::vector<TrainingRow> two(2);
  two[0].vector.add(FeatureKey("f1"), 1);
  two[0].label = 1;
  two[1].vector.add(FeatureKey("f2"), 1);
  two[1].label = -1;
  const auto t0 = Clock::now();
  const auto m = train(two, FeatureScaler::identity(), TrainConfig{});
  solver_s += seconds_since(t0);
  const double w1 = m.weight(FeatureKey("f1"));
  const double w2 = m.weight(FeatureKey("f2"));
  c.expect(std::abs(w1 - 0.70711) <= 1e-4 && std::abs(w2 + 0.70711) <= 1e-4,
           "two-point weights " + fmt(w1) + ", " + fmt(w2));
  c.expect(solver_s < 60.0, "solver time " + fmt(solver_s) + " s");
  return "20 sets, worst rel " + fmt(worst) + ", two-point (" + fmt(w1) + ", " + fmt(w2) +
         "), solver " + fmt(solver_s) + " s";
}

std::string unit_norm(Check& c) {
  double worst = 0.0;
  int models = 0;
  auto check = [&](const std::function<WeightModel()>& make, const std::string& what) {
    const auto a = make();
    const auto b = make();
    ++models;
    const double dev = std::abs(l2(a) - 1.0);
    worst = std::max(worst, dev);
    c.expect(dev <= 1e-9, what + " norm deviation " + fmt(dev));
    c.expect(a == b && model_to_json(a).dump() == model_to_json(b).dump(), what + " not repeatable");
  };
  for (int i = 0; i < 20; ++i) {
    const auto set = test_support::random_training_set(i);
    TrainConfig cfg;
    cfg.C = set.C;
    check([&] { return train(set.rows, cfg); }, "set " + std::to_string(i));
  }
  const auto league = synthetic::generate_league(test_support::small_league(3));
  check([&] { return train_ablated(league, {}); }, "league");
  check([&] { return train_ablated(league, {"Goal"}); }, "league ablated");
  return std::to_string(models) + " models, worst |norm-1| " + fmt(worst);
}

std::string ablation_direction(Check& c) {
  std::string info;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    synthetic::LeagueConfig cfg;
    cfg.seed = seed;
    const auto league = synthetic::generate_league(cfg);
    std::vector<MatchRecord> first;
    std::vector<MatchRecord> second;
    for (const auto& m : league) (m.season_id == "2021" ? first : second).push_back(m);
    double pct[2];
    int i = 0;
    for (const auto& ablation : {std::set<std::string>{}, std::set<std::string>{"Goal"}}) {
      const auto model = train_ablated(first, ablation);
      pct[i++] = evaluate_predictor(second, rate_players(first, model)).success_pct;
    }
    c.expect(pct[0] > pct[1], "seed " + std::to_string(seed) + ": full " + fmt(pct[0]) +
                                  " <= ablated " + fmt(pct[1]));
    info += (info.empty() ? "" : "; ") + fmt(pct[0]) + " > " + fmt(pct[1]);
  }
  return info;
}

std::string decomposition(Check& c) {
  const auto table = test_support::load_model(test_support::data_dir() / "table1_weights.json");
  std::vector<MatchRecord> matches;
  for (std::uint64_t seed = 100; matches.size() < 1000; ++seed) {
    auto cfg = test_support::small_league(seed, 8, 2);
    for (auto& m : synthetic::generate_league(cfg)) matches.push_back(std::move(m));
  }
  double worst = 0.0;
  for (const auto& m : matches) {
    for (const auto& team : {m.home_team_id, m.away_team_id}) {
      PerformanceVector sum;
      double score_sum = 0.0;
      for (const auto& p : m.players_of(team)) {
        const auto v = player_vector(m, p);
        sum.add(v);
        score_sum += match_score(v, table);
      }
      const auto tv = team_vector(m, team);
      c.expect(tv == sum, m.match_id + " " + team + " vector mismatch");
      c.expect(oracle::to_counts(tv) == oracle::recount_team(m, team), m.match_id + " recount mismatch");
      const double gap = std::abs(score_sum - match_score(tv, table));
      worst = std::max(worst, gap);
      c.expect(gap <= 1e-12, m.match_id + " " + team + " score gap " + fmt(gap));
    }
  }
  return std::to_string(matches.size()) + " matches, worst score gap " + fmt(worst);
}

std::string predictor_oracle(Check& c) {
  const auto league = synthetic::generate_league(test_support::small_league(42, 20, 2));
  std::vector<MatchRecord> first;
  std::vector<MatchRecord> eval;
  for (const auto& m : league) (m.season_id == "2021" ? first : eval).push_back(m);
  c.expect(eval.size() == 380, "expected 380 matches, got " + std::to_string(eval.size()));
  const auto ratings = rate_players(first, train(build_training_set(first)));

  std::string info;
  for (double eps : {kDefaultSimilarityEpsilon, 0.01, 0.5}) {
    const auto rep = evaluate_predictor(eval, ratings, eps);
    const auto want = oracle::count_predictor(eval, ratings, eps);
    c.expect(rep.evaluated == want.evaluated && rep.skipped == want.skipped, "counts differ");
    c.expect(rep.success_pct == want.success_pct(), "success_pct " + fmt(rep.success_pct) +
                                                        " vs " + fmt(want.success_pct()));
    c.expect(upset_rate(rep.records) == want.upset_rate(), "upset_rate differs");
    c.expect(similar_goal_spread(rep.records) == want.spread, "spread differs");
    if (info.empty()) info = "success " + fmt(rep.success_pct) + "% over " + std::to_string(rep.evaluated);
  }

  synthetic::Rng rng(8);
  long bad = 0;
  for (int i = 0; i < 10000; ++i) {
    const double a = rng.normal() * 0.01;
    const double b = a + rng.normal() * 1e-4;
    const double eps = std::abs(rng.normal()) * 1e-4;
    const auto ab = classify_pair(a, b, eps);
    const auto ba = classify_pair(b, a, eps);
    const bool symmetric = ab == PairRelation::kSimilar
                               ? ba == PairRelation::kSimilar
                               : (ba != PairRelation::kSimilar && ba != ab);
    const bool monotone =
        ab != PairRelation::kSimilar || classify_pair(a, b, eps * 2) == PairRelation::kSimilar;
    bad += (symmetric && monotone) ? 0 : 1;
  }
  c.expect(bad == 0, std::to_string(bad) + " classify_pair violations");
  return info + "; 10000 pairs checked";
}

std::string table_fixtures(Check& c) {
  const auto t1 = test_support::load_model(test_support::data_dir() / "table1_weights.json");
  const auto t2 = test_support::load_model(test_support::data_dir() / "table2_weights.json");
  auto [p1, n1] = top_weights(t1, 1);
  auto [p2, n2] = top_weights(t2, 1);
  auto expect_pair = [&](const std::pair<FeatureKey, double>& got, const std::string& key, double w) {
    c.expect(got.first.str() == key && got.second == w,
             "got (" + got.first.str() + ", " + fmt(got.second) + "), want (" + key + ", " + fmt(w) + ")");
  };
  expect_pair(p1[0], "Goal-Scored", 0.129);
  expect_pair(n1[0], "Free Kick-Penalty", -0.137);
  expect_pair(p2[0], "Pass-High pass-assist", 0.132);
  expect_pair(n2[0], "Foul-red card", -0.078);
  return "";
}

std::string live_batch(Check& c) {
  auto cfg = test_support::small_league(21, 4, 1);
  cfg.event_intensity = 0.5;
  const auto league = synthetic::generate_league(cfg);
  const auto model = std::make_shared<const WeightModel>(train(build_training_set(league)));

  int sessions = 0;
  for (const auto& m : league) {
    ++sessions;
    const auto entries = entries_for_match(m);
    LiveSession live(m.match_id, rosters_for_match(m), model, "m");
    c.expect(live.snapshot(0).players.size() == m.appearances.size(), m.match_id + " roster size");
    for (const auto& p : live.snapshot(0).players) {
      c.expect(p.score == 0.0, m.match_id + " snapshot(0) before events");
    }

    // prefix determinism: read early marks, then keep appending
    const auto half = entries.size() / 2;
    apply_entries(live, {entries.begin(), entries.begin() + static_cast<long>(half)});
    std::vector<SessionSnapshot> early;
    for (int mark = 0; mark < live.clock_minute(); ++mark) early.push_back(live.snapshot(mark));
    apply_entries(live, {entries.begin() + static_cast<long>(half), entries.end()});
    for (const auto& s : early) {
      c.expect(s == live.snapshot(s.mark_minute),
               m.match_id + " mark " + std::to_string(s.mark_minute) + " changed after append");
    }

    const auto replayed = replay_session(live.export_log());
    const auto& r = *replayed.session;
    const auto final_snap = r.snapshot(1000);
    for (const auto& p : r.snapshot(0).players) c.expect(p.score == 0.0, m.match_id + " snapshot(0)");
    for (const auto& p : final_snap.players) {
      c.expect(p.score == match_score(player_vector(m, p.player_id), *model),
               m.match_id + " " + p.player_id + " live != batch");
    }
    c.expect(r.series() == live.series(), m.match_id + " replayed series differs");
  }

  // crash recovery with a torn tail
  const fs::path dir = fs::temp_directory_path() / ("playerank_accept_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  const auto& m = league.front();
  const auto entries = entries_for_match(m);
  std::string id;
  std::vector<std::string> before;
  {
    SessionStore store(dir);
    store.add_model("m", *model);
    id = store.create_session(rosters_for_match(m), "m");
    for (const auto& e : entries) {
      if (const auto* ev = std::get_if<EventRecord>(&e)) {
        store.append_event(id, *ev);
      } else {
        store.record_substitution(id, std::get<Substitution>(e));
      }
    }
    for (const auto& s : store.series(id)) before.push_back(snapshot_to_json(s).dump());
  }
  std::ofstream(dir / (id + ".log"), std::ios::app) << R"({"seq":99999,"kind":"ev)";
  {
    SessionStore store(dir);
    store.add_model("m", *model);
    c.expect(store.recover() == 1, "recover count");
    std::vector<std::string> after;
    for (const auto& s : store.series(id)) after.push_back(snapshot_to_json(s).dump());
    c.expect(after == before, "recovered series not bit-identical");
  }
  fs::remove_all(dir);
  return std::to_string(sessions) + " sessions plus crash recovery";
}

int run(const std::string& args) {
  const std::string cmd = std::string(PLAYERANK_CLI) + " " + args + " > /dev/null";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string full_pipeline(Check& c) {
  const fs::path dir = fs::temp_directory_path() / ("playerank_pipeline_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string corpus = (test_support::data_dir() / "synthetic_league.jsonl").string();
  const std::string d = dir.string() + "/";
  const auto t0 = Clock::now();
  const std::vector<std::pair<std::string, std::string>> steps = {
      {"generate", "generate --seed 7 --teams 8 --seasons 2 --intensity 0.15 --out " + d + "regen.jsonl"},
      {"train", "train " + corpus + " --out " + d + "model.json"},
      {"rate", "rate " + corpus + " --model " + d + "model.json --season 2021 --out " + d + "ratings.jsonl"},
      {"predict", "predict " + corpus + " --ratings " + d + "ratings.jsonl --summary-out " + d +
                      "summary.json --scatter-out " + d + "scatter.csv"},
      {"record", "record " + corpus + " --model " + d + "model.json --out " + d + "session.log"},
      {"replay", "replay " + d + "session.log --out " + d + "series.csv"},
  };
  for (const auto& [name, args] : steps) {
    const int code = run(args);
    c.expect(code == 0, name + " exited " + std::to_string(code));
    if (code != 0) break;
  }
  const double elapsed = seconds_since(t0);
  c.expect(elapsed < 300.0, "took " + fmt(elapsed) + " s");
  if (c.failures.empty()) {
    c.expect(read_file(d + "regen.jsonl") == read_file(corpus), "regenerated corpus differs from bundled");
    std::ifstream in(d + "summary.json");
    const auto summary = nlohmann::json::parse(in);
    c.expect(summary["evaluated"].get<long>() > 0, "nothing evaluated");
  }
  fs::remove_all(dir);
  return fmt(elapsed) + " s";
}

}  // namespace

int main() {
  report("solver oracle equivalence", solver_oracle);
  report("unit norm and determinism", unit_norm);
  report("ablation direction", ablation_direction);
  report("decomposition and linearity", decomposition);
  report("predictor oracle", predictor_oracle);
  report("table fixtures", table_fixtures);
  report("live/batch equality", live_batch);
  report("full pipeline", full_pipeline);
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << "\n";
  return failed;
}
