// stylerank/collect_http.hpp

// Copyright 2026  The stylerank Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// HTTP routes for CollectService. Request and response bodies are single
// JSON objects; errors come back as {"error": message} with a 4xx status.
//
//   POST /sessions                    RaterProfile -> session summary
//   GET  /sessions/{id}/next          -> trial payload
//   POST /sessions/{id}/judgments     {pair_id, side_chosen} -> acknowledgment
//   POST /sessions/{id}/description   {text} -> acknowledgment
//   GET  /audio/{utterance_id}        -> WAV bytes
//   GET  /export                      -> judgment lines
//   GET  /export/demographics         -> demographics summary

#ifndef STYLERANK_COLLECT_HTTP_HPP_
#define STYLERANK_COLLECT_HTTP_HPP_

#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "stylerank/collect.hpp"
#include "stylerank/corpus.hpp"

namespace stylerank {

/// utterance id -> WAV path, with relative paths resolved against `base`.
inline std::map<std::string, std::filesystem::path> audio_index(
    const std::vector<UtteranceRecord> &records, const std::filesystem::path &base) {
  std::map<std::string, std::filesystem::path> out;
  for (const auto &r : records) {
    std::filesystem::path p = r.audio_path;
    out.emplace(r.id, p.is_absolute() ? p : base / p);
  }
  return out;
}

namespace detail {

inline void send_json(httplib::Response &res, int status, const Json &body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline Json parse_body(const httplib::Request &req) {
  Json body = Json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object())
    throw ServiceError(400, "request body must be a JSON object");
  return body;
}

inline std::string body_string(const Json &body, const char *key) {
  if (!body.contains(key) || !body[key].is_string())
    throw ServiceError(400, std::string("missing string field '") + key + "'");
  return body[key].get<std::string>();
}

// Runs `fn`, turning library errors into JSON error responses.
template <typename Fn>
void guarded(httplib::Response &res, Fn &&fn) {
  try {
    fn();
  } catch (const ServiceError &e) {
    send_json(res, e.status(), {{"error", e.what()}});
  } catch (const ParseError &e) {
    send_json(res, 400, {{"error", e.what()}});
  } catch (const std::exception &e) {
    send_json(res, 500, {{"error", e.what()}});
  }
}

}  // namespace detail

/// Binds the collection routes. `service` and `audio` must outlive `server`.
inline void register_routes(httplib::Server &server, CollectService &service,
                            const std::map<std::string, std::filesystem::path> &audio) {
  using detail::guarded;
  using detail::send_json;

  server.Post("/sessions", [&](const httplib::Request &req, httplib::Response &res) {
    guarded(res, [&] {
      const auto profile = profile_from_json(detail::parse_body(req));
      send_json(res, 201, session_to_json(service.create_session(profile)));
    });
  });

  server.Get(R"(/sessions/([^/]+)/next)",
             [&](const httplib::Request &req, httplib::Response &res) {
               guarded(res, [&] {
                 send_json(res, 200, trial_to_json(service.next_trial(req.matches[1])));
               });
             });

  server.Post(R"(/sessions/([^/]+)/judgments)",
              [&](const httplib::Request &req, httplib::Response &res) {
                guarded(res, [&] {
                  const auto body = detail::parse_body(req);
                  const std::string session_id = req.matches[1];
                  const auto side = parse_side(detail::body_string(body, "side_chosen"));
                  const auto j = service.submit_judgment(
                      session_id, detail::body_string(body, "pair_id"), side);
                  const auto s = service.find_session(session_id);
                  Json ack = judgment_to_json(j);
                  ack["cursor"] = s->cursor;
                  ack["status"] = s->complete() ? "complete" : "open";
                  send_json(res, 200, ack);
                });
              });

  server.Post(R"(/sessions/([^/]+)/description)",
              [&](const httplib::Request &req, httplib::Response &res) {
                guarded(res, [&] {
                  const auto body = detail::parse_body(req);
                  const std::string session_id = req.matches[1];
                  service.submit_description(session_id, detail::body_string(body, "text"));
                  send_json(res, 200, {{"session_id", session_id}, {"status", "recorded"}});
                });
              });

  server.Get(R"(/audio/([^/]+))", [&](const httplib::Request &req, httplib::Response &res) {
    guarded(res, [&] {
      auto it = audio.find(req.matches[1]);
      if (it == audio.end())
        throw ServiceError(404, "unknown utterance '" + std::string(req.matches[1]) + "'");
      std::ifstream in(it->second, std::ios::binary);
      if (!in) throw ServiceError(404, "audio file missing for '" + it->first + "'");
      std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      res.status = 200;
      res.set_content(std::move(bytes), "audio/wav");
    });
  });

  server.Get("/export", [&](const httplib::Request &, httplib::Response &res) {
    guarded(res, [&] {
      res.status = 200;
      res.set_content(service.export_judgments(), "application/x-ndjson");
    });
  });

  server.Get("/export/demographics", [&](const httplib::Request &, httplib::Response &res) {
    guarded(res, [&] { send_json(res, 200, demographics_to_json(service.demographics())); });
  });
}

}  // namespace stylerank

#endif  // STYLERANK_COLLECT_HTTP_HPP_
