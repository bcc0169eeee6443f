#pragma once

// HTTP+JSON surface of the live-session store.
//
//   POST /sessions                       {rosters, model_id, tick_minutes} -> {session_id}
//   POST /sessions/{id}/events           event JSON                        -> {seq}
//   POST /sessions/{id}/subs             {minute, off_player, on_player}   -> {ok, seq}
//   GET  /sessions/{id}/snapshots?mark=M                                   -> snapshot
//   GET  /sessions/{id}/series                                             -> [snapshot]
//   GET  /sessions/{id}/export                                             -> session log
//
// Errors are {"error": code, "detail": text}.

#include <string>

#include <httplib.h>
#include <json.hpp>

#include "playerank/error.hpp"
#include "playerank/live_session.hpp"
#include "playerank/session_store.hpp"

namespace playerank::http {

inline int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownSession:
    case ErrorCode::kUnknownModel:
      return 404;
    case ErrorCode::kDuplicatePlayer:
    case ErrorCode::kPlayerOffPitch:
    case ErrorCode::kClockRegression:
    case ErrorCode::kNotOnPitch:
    case ErrorCode::kAlreadyUsed:
      return 409;
    case ErrorCode::kIo:
    case ErrorCode::kCorruptLog:
      return 500;
    default:
      return 400;
  }
}

inline void send_json(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, int status, std::string_view code,
                       const std::string& detail) {
  send_json(res, status, {{"error", code}, {"detail", detail}});
}

template <typename Handler>
auto guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const Error& e) {
      send_error(res, status_for(e.code()), error_name(e.code()), e.detail());
    } catch (const nlohmann::json::exception& e) {
      send_error(res, 400, "BadRequest", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "Internal", e.what());
    }
  };
}

inline nlohmann::json parse_body(const httplib::Request& req) {
  auto j = nlohmann::json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::kInvalidArgument, "request body must be a JSON object");
  }
  return j;
}

inline void register_routes(httplib::Server& server, SessionStore& store) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.status = 204;
  });

  server.Get("/models", guarded([&store](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"models", store.model_ids()}});
  }));

  server.Post("/sessions", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    auto rosters = LiveSession::rosters_from_json(body.at("rosters"));
    const auto model_id = body.at("model_id").get<std::string>();
    const int tick = body.value("tick_minutes", kDefaultTickMinutes);
    const auto id = store.create_session(std::move(rosters), model_id, tick);
    send_json(res, 201, {{"session_id", id}});
  }));

  server.Post(R"(/sessions/([^/]+)/events)",
              guarded([&store](const httplib::Request& req, httplib::Response& res) {
                const auto seq = store.append_event(req.matches[1], event_from_json(parse_body(req)));
                send_json(res, 201, {{"seq", seq}});
              }));

  server.Post(R"(/sessions/([^/]+)/subs)",
              guarded([&store](const httplib::Request& req, httplib::Response& res) {
                const auto seq =
                    store.record_substitution(req.matches[1], substitution_from_json(parse_body(req)));
                send_json(res, 201, {{"ok", true}, {"seq", seq}});
              }));

  server.Get(R"(/sessions/([^/]+)/snapshots)",
             guarded([&store](const httplib::Request& req, httplib::Response& res) {
               const std::string id = req.matches[1];
               if (!req.has_param("mark")) {
                 send_json(res, 200, snapshot_to_json(store.current_snapshot(id)));
                 return;
               }
               int mark = 0;
               try {
                 std::size_t used = 0;
                 const auto text = req.get_param_value("mark");
                 mark = std::stoi(text, &used);
                 if (used != text.size()) throw std::invalid_argument(text);
               } catch (const std::exception&) {
                 throw Error(ErrorCode::kInvalidArgument, "mark must be an integer");
               }
               send_json(res, 200, snapshot_to_json(store.snapshot(id, mark)));
             }));

  server.Get(R"(/sessions/([^/]+)/series)",
             guarded([&store](const httplib::Request& req, httplib::Response& res) {
               auto arr = nlohmann::ordered_json::array();
               for (const auto& s : store.series(req.matches[1])) arr.push_back(snapshot_to_json(s));
               send_json(res, 200, arr);
             }));

  server.Get(R"(/sessions/([^/]+)/export)",
             guarded([&store](const httplib::Request& req, httplib::Response& res) {
               res.set_content(store.export_log(req.matches[1]), "application/x-ndjson");
             }));
}

}  // namespace playerank::http
