// Copyright 2026 The hleval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HLEVAL_HTTP_SERVICE_HPP_
#define HLEVAL_HTTP_SERVICE_HPP_

// HTTP+JSON front end of AnnotationService.
//
//   POST /sessions
//   GET  /sessions/{id}/annotators/{aid}/next
//   POST /sessions/{id}/annotators/{aid}/judgments   {sample_id, verdict}
//   POST /sessions/{id}/annotators/{aid}/flags       {sample_id}
//   GET  /sessions/{id}/export[?partial=true]
//   GET  /sessions/{id}/progress

#include <iomanip>
#include <sstream>
#include <string>

#include "hleval/annotation_service.hpp"
#include "httplib.h"
#include "json.hpp"

namespace hleval {

namespace detail {

inline void send_json(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, int status, const std::string& message,
                       std::optional<std::int64_t> deficit = {}) {
  nlohmann::ordered_json body = {{"schema_version", kServiceSchemaVersion},
                                 {"error", message}};
  if (deficit) body["deficit"] = *deficit;
  send_json(res, status, body);
}

template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const ServiceError& e) {
      send_error(res, e.http_status(), e.what(), e.deficit());
    } catch (const nlohmann::json::exception& e) {
      send_error(res, 400, std::string("bad request body: ") + e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

inline SessionParams session_params(const nlohmann::json& body) {
  SessionParams p;
  if (!body.contains("seed")) {
    throw ServiceError(ServiceError::Code::kBadRequest, "seed is required");
  }
  p.allocation.seed = body.at("seed").get<std::uint64_t>();
  p.allocation.k = body.value("k", p.allocation.k);
  p.allocation.load_min = body.value("load_min", p.allocation.load_min);
  p.allocation.load_max = body.value("load_max", p.allocation.load_max);
  if (body.contains("annotators")) {
    p.annotators = body.at("annotators").get<std::vector<std::string>>();
  } else {
    const int n = body.at("n_annotators").get<int>();
    for (int a = 0; a < n; ++a) {
      std::ostringstream id;
      id << "a" << std::setw(3) << std::setfill('0') << a;
      p.annotators.push_back(id.str());
    }
  }
  return p;
}

}  // namespace detail

/// Registers the annotation endpoints on `server`. The service must outlive
/// the server.
inline void mount_annotation_routes(httplib::Server& server, AnnotationService& service) {
  using detail::guarded;
  using detail::send_json;

  server.Post("/sessions", guarded([&service](const httplib::Request& req,
                                              httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    const std::string id = service.create_session(detail::session_params(body));
    nlohmann::ordered_json queues = nlohmann::ordered_json::object();
    for (const auto& [aid, samples] : service.assignment(id).queues) {
      queues[aid] = samples.size();
    }
    send_json(res, 201, {{"schema_version", kServiceSchemaVersion},
                         {"session_id", id},
                         {"queues", std::move(queues)}});
  }));

  server.Get(R"(/sessions/([^/]+)/annotators/([^/]+)/next)",
             guarded([&service](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200,
                         to_json(service.next_sample(req.matches[1], req.matches[2])));
             }));

  server.Post(R"(/sessions/([^/]+)/annotators/([^/]+)/judgments)",
              guarded([&service](const httplib::Request& req, httplib::Response& res) {
                const auto body = nlohmann::json::parse(req.body);
                const auto verdict = parse_verdict(body.at("verdict").get<std::string>());
                if (!verdict) {
                  throw ServiceError(ServiceError::Code::kBadRequest,
                                     "verdict must be \"human\" or \"system\"");
                }
                const std::string session = req.matches[1];
                const std::string annotator = req.matches[2];
                service.submit_judgment(session, annotator,
                                        body.at("sample_id").get<std::string>(), *verdict);
                send_json(res, 200, {{"schema_version", kServiceSchemaVersion},
                                     {"accepted", true},
                                     {"next", to_json(service.next_sample(session, annotator))}});
              }));

  server.Post(R"(/sessions/([^/]+)/annotators/([^/]+)/flags)",
              guarded([&service](const httplib::Request& req, httplib::Response& res) {
                const auto body = nlohmann::json::parse(req.body);
                const std::string session = req.matches[1];
                const std::string annotator = req.matches[2];
                service.flag_unplayable(session, annotator,
                                        body.at("sample_id").get<std::string>());
                send_json(res, 200, {{"schema_version", kServiceSchemaVersion},
                                     {"requeued", true},
                                     {"next", to_json(service.next_sample(session, annotator))}});
              }));

  server.Get(R"(/sessions/([^/]+)/export)",
             guarded([&service](const httplib::Request& req, httplib::Response& res) {
               const std::string p = req.get_param_value("partial");
               const bool partial = p == "true" || p == "1";
               const auto judgments = service.export_judgments(req.matches[1], partial);
               res.status = 200;
               res.set_content(export_corpus_text(judgments), "application/x-ndjson");
             }));

  server.Get(R"(/sessions/([^/]+)/progress)",
             guarded([&service](const httplib::Request& req, httplib::Response& res) {
               const std::string id = req.matches[1];
               send_json(res, 200, to_json(service.progress(id), id));
             }));
}

}  // namespace hleval

#endif  // HLEVAL_HTTP_SERVICE_HPP_
