// playerank: command-line entry point for the rating pipeline.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>

#include "playerank/http_api.hpp"
#include "playerank/playerank.hpp"

namespace fs = std::filesystem;
using namespace playerank;

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitInternal = 70;

std::string exit_code_help() {
  std::ostringstream os;
  os << "Exit codes:\n  0  success\n";
  for (int c = 1; c <= static_cast<int>(ErrorCode::kIo); ++c) {
    os << "  " << c << (c < 10 ? "  " : " ") << error_name(static_cast<ErrorCode>(c)) << '\n';
  }
  os << "  " << kExitUsage << " usage error\n  " << kExitInternal << " internal error\n";
  return os.str();
}

fs::path resolve(const std::string& out_dir, const std::string& given, const char* fallback) {
  fs::path p = given.empty() ? fs::path(fallback) : fs::path(given);
  if (p.is_relative() && !out_dir.empty()) p = fs::path(out_dir) / p;
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return p;
}

std::vector<MatchRecord> load_events(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + p.string());
  return parse_event_log(in);
}

WeightModel load_model_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + p.string());
  return read_model(in);
}

RatingTable load_ratings(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + p.string());
  return read_ratings(in);
}

void print_weight_table(std::ostream& os, const WeightModel& m, std::size_t k) {
  k = std::min(k, m.weights.size());
  const auto [pos, neg] = top_weights(m, k);
  std::size_t width = 8;
  for (std::size_t i = 0; i < k; ++i) {
    width = std::max({width, pos[i].first.str().size(), neg[i].first.str().size()});
  }
  char buf[32];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%+.3f", v);
    return std::string(buf);
  };
  const std::string left = "Top-" + std::to_string(k) + " Negative Influence";
  os << left << std::string(width + 10 - std::min(left.size(), width + 9), ' ') << "Top-" << k
     << " Positive Influence\n";
  for (std::size_t i = 0; i < k; ++i) {
    const auto& n = neg[i].first.str();
    const auto& p = pos[i].first.str();
    os << n << std::string(width - n.size() + 1, ' ') << num(neg[i].second) << "   " << p
       << std::string(width - p.size() + 1, ' ') << num(pos[i].second) << '\n';
  }
}

// Holdout accuracy: sign of the raw decision value on held-out team rows.
double holdout_accuracy(const WeightModel& m, const std::vector<TrainingRow>& rows) {
  long hit = 0;
  for (const auto& r : rows) {
    double f = m.intercept;
    for (const auto& [k, c] : r.vector.entries()) {
      f += m.weight(k) * m.scaler.scale(k, static_cast<double>(c));
    }
    hit += (f > 0) == (r.label > 0);
  }
  return rows.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(rows.size());
}

volatile std::sig_atomic_t g_stop = 0;

extern "C" void on_signal(int) { g_stop = 1; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Football player rating pipeline: train, rate, predict, replay, serve."};
  app.footer(exit_code_help());
  app.set_config("--config", "", "key = value configuration file; flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_dir;
  app.add_option("--out-dir", out_dir, "Directory for relative output paths")
      ->envname("PLAYERANK_OUT_DIR");

  // generate
  auto* gen = app.add_subcommand("generate", "Write a seeded synthetic league event log");
  synthetic::LeagueConfig league;
  std::string gen_out;
  gen->add_option("--seed", league.seed, "Random seed")->capture_default_str();
  gen->add_option("--teams", league.teams, "Number of teams")->capture_default_str()
      ->check(CLI::Range(2, 99));
  gen->add_option("--seasons", league.seasons, "Number of seasons")->capture_default_str()
      ->check(CLI::Range(1, 50));
  gen->add_option("--first-season", league.first_season, "First season id")->capture_default_str();
  gen->add_option("--intensity", league.event_intensity, "Non-goal event rate multiplier")
      ->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--out", gen_out, "Output event log")->default_str("league.jsonl");

  // train
  auto* tr = app.add_subcommand("train", "Learn feature weights from an event log");
  std::string tr_events;
  std::string tr_out;
  std::vector<std::string> ablate;
  TrainConfig tc;
  double holdout = 0.0;
  std::size_t top_k = 10;
  tr->add_option("events", tr_events, "Event log (JSON lines)")->required();
  tr->add_option("--ablate", ablate, "Drop features with this component prefix (repeatable)");
  tr->add_option("-C,--C", tc.C, "Hinge loss weight")->capture_default_str()
      ->check(CLI::PositiveNumber);
  tr->add_option("--tolerance", tc.tolerance, "Solver stopping tolerance")->capture_default_str()
      ->check(CLI::PositiveNumber);
  tr->add_option("--max-epochs", tc.max_epochs, "Iteration cap in passes over the rows")
      ->capture_default_str()->check(CLI::PositiveNumber);
  tr->add_option("--seed", tc.seed, "Seed for the holdout split")->capture_default_str();
  tr->add_option("--holdout", holdout, "Fraction of matches held out for evaluation")
      ->capture_default_str()->check(CLI::Range(0.0, 0.9));
  tr->add_option("--top", top_k, "Rows in the printed weight tables")->capture_default_str()
      ->check(CLI::PositiveNumber);
  tr->add_option("--out", tr_out, "Output model file")->default_str("model.json");

  // rate
  auto* rt = app.add_subcommand("rate", "Compute player ratings with a trained model");
  std::string rt_events, rt_model, rt_out, rt_hist_out;
  std::vector<std::string> rt_seasons;
  double hist_width = 0.0;
  rt->add_option("events", rt_events, "Event log")->required();
  rt->add_option("--model", rt_model, "Weight model file")->required();
  rt->add_option("--season", rt_seasons, "Restrict to these seasons (repeatable)");
  rt->add_option("--out", rt_out, "Ratings output (JSON lines)")->default_str("ratings.jsonl");
  rt->add_option("--histogram", hist_width, "Also write a match-score histogram with this bin width")
      ->check(CLI::PositiveNumber);
  rt->add_option("--histogram-out", rt_hist_out, "Histogram CSV path")
      ->default_str("histogram.csv");

  // predict
  auto* pr = app.add_subcommand("predict", "Evaluate the superior-team outcome predictor");
  std::string pr_events, pr_ratings, pr_summary, pr_scatter;
  std::vector<std::string> pr_seasons;
  double epsilon = kDefaultSimilarityEpsilon;
  double gap = kDefaultUpsetGap;
  pr->add_option("events", pr_events, "Event log")->required();
  pr->add_option("--ratings", pr_ratings, "Ratings file from `rate`")->required();
  pr->add_option("--epsilon", epsilon, "Similarity threshold")->capture_default_str()
      ->check(CLI::PositiveNumber);
  pr->add_option("--gap", gap, "Quality gap for the upset rate")->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  pr->add_option("--season", pr_seasons, "Evaluate only these seasons (repeatable)");
  pr->add_option("--summary-out", pr_summary, "Summary JSON")->default_str("summary.json");
  pr->add_option("--scatter-out", pr_scatter, "Scatter CSV")->default_str("scatter.csv");

  // record
  auto* rc = app.add_subcommand("record", "Feed one match through a live session and write its log");
  std::string rc_events, rc_model, rc_match, rc_out;
  int rc_tick = kDefaultTickMinutes;
  rc->add_option("events", rc_events, "Event log")->required();
  rc->add_option("--model", rc_model, "Weight model file")->required();
  rc->add_option("--match", rc_match, "Match id (default: first match)");
  rc->add_option("--tick", rc_tick, "Snapshot tick in minutes")->capture_default_str()
      ->check(CLI::PositiveNumber);
  rc->add_option("--out", rc_out, "Session log output")->default_str("session.log");

  // replay
  auto* rp = app.add_subcommand("replay", "Rebuild a session from its log and write its series");
  std::string rp_log, rp_out;
  rp->add_option("log", rp_log, "Session log")->required();
  rp->add_option("--out", rp_out, "Series CSV (one row per tick and player)")
      ->default_str("series.csv");

  // serve
  auto* sv = app.add_subcommand("serve", "Serve live sessions over HTTP+JSON");
  std::string host = "127.0.0.1";
  int port = 8080;
  std::vector<std::string> sv_models;
  std::string models_dir, sessions_dir, fsync_policy = "always";
  sv->add_option("--host", host, "Bind address")->capture_default_str();
  sv->add_option("--port", port, "Port; 0 picks a free one")->capture_default_str()
      ->check(CLI::Range(0, 65535));
  sv->add_option("--model", sv_models, "Model file, registered under its file stem (repeatable)");
  sv->add_option("--models-dir", models_dir, "Register every *.json model in this directory");
  sv->add_option("--sessions-dir", sessions_dir, "Session log directory (empty: memory only)");
  sv->add_option("--fsync", fsync_policy, "Log durability: always or never")
      ->capture_default_str()->check(CLI::IsMember({"always", "never"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen) {
      const auto path = resolve(out_dir, gen_out, "league.jsonl");
      std::ostringstream os;
      write_event_log(os, synthetic::generate_league(league));
      write_file_atomic(path, os.str());
      std::cout << path.string() << '\n';
    } else if (*tr) {
      auto corpus = load_events(tr_events);
      std::vector<MatchRecord> held;
      if (holdout > 0.0) {
        synthetic::Rng rng(tc.seed);
        std::vector<MatchRecord> kept;
        for (auto& m : corpus) (rng.uniform() < holdout ? held : kept).push_back(std::move(m));
        corpus = std::move(kept);
      }
      const std::set<std::string> ablation(ablate.begin(), ablate.end());
      const auto model = train_ablated(corpus, ablation, tc);
      const auto path = resolve(out_dir, tr_out, "model.json");
      std::ostringstream os;
      write_model(os, model);
      write_file_atomic(path, os.str());
      print_weight_table(std::cout, model, top_k);
      std::cout << "rows " << model.stats.rows << ", features " << model.weights.size()
                << ", iterations " << model.stats.iterations
                << (model.stats.converged ? "" : " (not converged)") << '\n';
      if (!held.empty()) {
        std::vector<MatchRecord> decisive;
        for (const auto& m : held) {
          if (m.goals_home != m.goals_away) decisive.push_back(m);
        }
        if (!decisive.empty()) {
          std::cout << "holdout accuracy "
                    << format_double(holdout_accuracy(model, build_training_set(decisive, ablation)))
                    << " on " << 2 * decisive.size() << " rows\n";
        }
      }
      std::cout << path.string() << '\n';
    } else if (*rt) {
      const auto corpus = load_events(rt_events);
      const auto model = load_model_file(rt_model);
      const std::set<std::string> seasons(rt_seasons.begin(), rt_seasons.end());
      const auto ratings = rate_players(corpus, model, seasons);
      if (ratings.empty()) throw Error(ErrorCode::kNoMatches, "no matches in the selected seasons");
      const auto path = resolve(out_dir, rt_out, "ratings.jsonl");
      std::ostringstream os;
      write_ratings(os, ratings);
      write_file_atomic(path, os.str());
      std::cout << ratings.size() << " players rated\n" << path.string() << '\n';
      if (hist_width > 0.0) {
        std::vector<MatchRecord> selected;
        for (const auto& m : corpus) {
          if (seasons.empty() || seasons.contains(m.season_id)) selected.push_back(m);
        }
        std::vector<double> scores;
        for (const auto& s : score_matches(selected, model)) scores.push_back(s.score);
        std::ostringstream h;
        h << "bin_lo,count\n";
        for (const auto& b : score_distribution(scores, hist_width)) {
          h << format_double(b.lo) << ',' << b.count << '\n';
        }
        const auto hpath = resolve(out_dir, rt_hist_out, "histogram.csv");
        write_file_atomic(hpath, h.str());
        std::cout << hpath.string() << '\n';
      }
    } else if (*pr) {
      auto corpus = load_events(pr_events);
      const auto ratings = load_ratings(pr_ratings);
      if (!pr_seasons.empty()) {
        const std::set<std::string> keep(pr_seasons.begin(), pr_seasons.end());
        std::erase_if(corpus, [&](const MatchRecord& m) { return !keep.contains(m.season_id); });
      }
      const auto rep = evaluate_predictor(corpus, ratings, epsilon);
      const auto summary = summary_json(rep, gap);
      write_file_atomic(resolve(out_dir, pr_summary, "summary.json"), summary.dump(2) + '\n');
      std::ostringstream csv;
      write_scatter_csv(csv, rep.records);
      write_file_atomic(resolve(out_dir, pr_scatter, "scatter.csv"), csv.str());
      std::cout << summary.dump() << '\n';
    } else if (*rc) {
      const auto corpus = load_events(rc_events);
      if (corpus.empty()) throw Error(ErrorCode::kNoMatches, "event log is empty");
      const MatchRecord* match = &corpus.front();
      if (!rc_match.empty()) {
        auto it = std::find_if(corpus.begin(), corpus.end(),
                               [&](const MatchRecord& m) { return m.match_id == rc_match; });
        if (it == corpus.end()) throw Error(ErrorCode::kNoMatches, "no match " + rc_match);
        match = &*it;
      }
      auto model = std::make_shared<const WeightModel>(load_model_file(rc_model));
      LiveSession session(match->match_id, rosters_for_match(*match), model,
                          fs::path(rc_model).stem().string(), rc_tick);
      apply_entries(session, entries_for_match(*match));
      const auto path = resolve(out_dir, rc_out, "session.log");
      write_file_atomic(path, session.export_log());
      std::cout << session.last_seq() << " entries\n" << path.string() << '\n';
    } else if (*rp) {
      const auto replayed = replay_session(read_file(rp_log));
      std::ostringstream csv;
      csv << "mark_minute,player_id,team_id,score,on_pitch\n";
      const auto series = replayed.session->series();
      for (const auto& snap : series) {
        for (const auto& p : snap.players) {
          csv << snap.mark_minute << ',' << p.player_id << ',' << p.team_id << ','
              << format_double(p.score) << ',' << (p.on_pitch ? 1 : 0) << '\n';
        }
      }
      const auto path = resolve(out_dir, rp_out, "series.csv");
      write_file_atomic(path, csv.str());
      std::cout << series.size() << " ticks\n" << path.string() << '\n';
    } else if (*sv) {
      SessionStore store(sessions_dir,
                         fsync_policy == "never" ? FsyncPolicy::kNever : FsyncPolicy::kAlways);
      std::vector<fs::path> files(sv_models.begin(), sv_models.end());
      if (!models_dir.empty()) {
        std::vector<fs::path> found;
        for (const auto& e : fs::directory_iterator(models_dir)) {
          if (e.is_regular_file() && e.path().extension() == ".json") found.push_back(e.path());
        }
        std::sort(found.begin(), found.end());
        files.insert(files.end(), found.begin(), found.end());
      }
      if (files.empty()) throw Error(ErrorCode::kUnknownModel, "no models given");
      for (const auto& f : files) store.add_model(f.stem().string(), load_model_file(f));
      const auto restored = store.recover();

      httplib::Server server;
      http::register_routes(server, store);
      const int bound = port == 0 ? server.bind_to_any_port(host) : server.bind_to_port(host, port)
                                                                        ? port
                                                                        : -1;
      if (bound < 0) throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::atomic<bool> finished{false};
      std::thread watcher([&] {
        while (!finished && !g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
        server.stop();
      });
      std::cout << "listening on " << host << ':' << bound << " (" << restored
                << " sessions restored)" << std::endl;
      server.listen_after_bind();
      finished = true;
      watcher.join();
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInternal;
  }
  return 0;
}
