#pragma once

// Thread-safe registry of live sessions with append-only log persistence.
// Writes to one session are serialized; reads take a shared lock and always
// see a fully applied prefix.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include <unistd.h>

#include "playerank/error.hpp"
#include "playerank/io.hpp"
#include "playerank/live_session.hpp"
#include "playerank/weight_model.hpp"

namespace playerank {

enum class FsyncPolicy { kAlways, kNever };

/// Append-only line file; each append is flushed (and optionally fsynced)
/// before it returns.
class LogFile {
 public:
  LogFile(const std::filesystem::path& path, FsyncPolicy policy) : policy_(policy) {
    file_ = std::fopen(path.c_str(), "ab");
    if (!file_) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  }
  LogFile(const LogFile&) = delete;
  LogFile& operator=(const LogFile&) = delete;
  ~LogFile() {
    if (file_) std::fclose(file_);
  }

  void append(const std::string& line) {
    const bool ok = std::fwrite(line.data(), 1, line.size(), file_) == line.size() &&
                    std::fputc('\n', file_) != EOF && std::fflush(file_) == 0 &&
                    (policy_ == FsyncPolicy::kNever || ::fsync(::fileno(file_)) == 0);
    if (!ok) throw Error(ErrorCode::kIo, "log append failed");
  }

 private:
  std::FILE* file_ = nullptr;
  FsyncPolicy policy_;
};

class SessionStore {
 public:
  /// An empty `dir` keeps sessions in memory only.
  explicit SessionStore(std::filesystem::path dir = {}, FsyncPolicy policy = FsyncPolicy::kAlways)
      : dir_(std::move(dir)), policy_(policy) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
  }

  void add_model(const std::string& model_id, WeightModel model) {
    std::unique_lock lock(mu_);
    models_[model_id] = std::make_shared<const WeightModel>(std::move(model));
  }

  bool has_model(const std::string& model_id) const {
    std::shared_lock lock(mu_);
    return models_.contains(model_id);
  }

  std::vector<std::string> model_ids() const {
    std::shared_lock lock(mu_);
    std::vector<std::string> out;
    for (const auto& [id, m] : models_) out.push_back(id);
    return out;
  }

  std::string create_session(std::vector<TeamRoster> rosters, const std::string& model_id,
                             int tick_minutes = kDefaultTickMinutes) {
    std::unique_lock lock(mu_);
    auto model = models_.find(model_id);
    if (model == models_.end()) throw Error(ErrorCode::kUnknownModel, model_id);
    const std::string id = next_id();
    auto slot = std::make_shared<Slot>();
    slot->session = std::make_unique<LiveSession>(id, std::move(rosters), model->second, model_id,
                                                  tick_minutes);
    if (!dir_.empty()) {
      const auto path = log_path(id);
      write_file_atomic(path, slot->session->header_line() + '\n');
      attach_log(*slot, path);
    }
    sessions_.emplace(id, std::move(slot));
    return id;
  }

  long append_event(const std::string& id, EventRecord e) {
    auto slot = find(id);
    std::unique_lock lock(slot->mu);
    return slot->session->append_event(std::move(e));
  }

  long record_substitution(const std::string& id, Substitution s) {
    auto slot = find(id);
    std::unique_lock lock(slot->mu);
    return slot->session->record_substitution(std::move(s));
  }

  SessionSnapshot snapshot(const std::string& id, int mark) const {
    auto slot = find(id);
    std::shared_lock lock(slot->mu);
    return slot->session->snapshot(mark);
  }

  /// Snapshot at the current clock minute.
  SessionSnapshot current_snapshot(const std::string& id) const {
    auto slot = find(id);
    std::shared_lock lock(slot->mu);
    return slot->session->snapshot(slot->session->clock_minute());
  }

  std::vector<SessionSnapshot> series(const std::string& id) const {
    auto slot = find(id);
    std::shared_lock lock(slot->mu);
    return slot->session->series();
  }

  std::string export_log(const std::string& id) const {
    auto slot = find(id);
    std::shared_lock lock(slot->mu);
    return slot->session->export_log();
  }

  std::vector<std::string> session_ids() const {
    std::shared_lock lock(mu_);
    std::vector<std::string> out;
    for (const auto& [id, s] : sessions_) out.push_back(id);
    return out;
  }

  /// Reloads every session log found in the store directory. Unacknowledged
  /// torn tails are truncated away; logs whose header is unreadable are
  /// renamed to *.corrupt. Returns the number of sessions restored.
  std::size_t recover() {
    if (dir_.empty()) return 0;
    std::unique_lock lock(mu_);
    std::size_t restored = 0;
    std::vector<std::filesystem::path> logs;
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
      if (entry.is_regular_file() && entry.path().extension() == ".log") logs.push_back(entry.path());
    }
    std::sort(logs.begin(), logs.end());
    for (const auto& path : logs) {
      const auto text = read_file(path);
      ReplayResult r;
      try {
        r = replay_session(text, /*allow_torn_tail=*/true);
      } catch (const Error&) {
        auto bad = path;
        bad += ".corrupt";
        std::filesystem::rename(path, bad);
        continue;
      }
      if (r.dropped_torn_tail) std::filesystem::resize_file(path, r.valid_bytes);
      const std::string id = r.session->id();
      if (sessions_.contains(id)) continue;
      auto slot = std::make_shared<Slot>();
      slot->session = std::move(r.session);
      attach_log(*slot, path);
      bump_counter(id);
      sessions_.emplace(id, std::move(slot));
      ++restored;
    }
    return restored;
  }

  std::filesystem::path log_path(const std::string& id) const { return dir_ / (id + ".log"); }

 private:
  struct Slot {
    mutable std::shared_mutex mu;
    std::unique_ptr<LiveSession> session;
    std::unique_ptr<LogFile> log;
  };

  void attach_log(Slot& slot, const std::filesystem::path& path) {
    slot.log = std::make_unique<LogFile>(path, policy_);
    LogFile* log = slot.log.get();
    slot.session->set_log_sink([log](const std::string& line) { log->append(line); });
  }

  std::shared_ptr<Slot> find(const std::string& id) const {
    std::shared_lock lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::kUnknownSession, id);
    return it->second;
  }

  std::string next_id() {
    for (;;) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "s%06lu", ++counter_);
      std::string id(buf);
      if (!sessions_.contains(id) && (dir_.empty() || !std::filesystem::exists(log_path(id)))) {
        return id;
      }
    }
  }

  void bump_counter(const std::string& id) {
    if (id.size() > 1 && id[0] == 's') {
      try {
        counter_ = std::max(counter_, std::stoul(id.substr(1)));
      } catch (const std::exception&) {
      }
    }
  }

  std::filesystem::path dir_;
  FsyncPolicy policy_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<const WeightModel>> models_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  unsigned long counter_ = 0;
};

}  // namespace playerank
