#include "itinera/api/server.hpp"

#include "itinera/common/errors.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

namespace itinera::api {

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message,
                const nlohmann::json& detail = nullptr) {
    send_json(res, status, {{"code", code}, {"message", message}, {"detail", detail}});
}

nlohmann::json parse_body(const httplib::Request& req) {
    auto body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
        throw ValidationError("body", "expected a JSON object");
    }
    return body;
}

std::string string_field(const nlohmann::json& body, const std::string& name) {
    const auto it = body.find(name);
    if (it == body.end() || !it->is_string()) {
        throw ValidationError(name, "required string field");
    }
    return it->get<std::string>();
}

/// Runs a handler and maps domain errors onto the envelope.
template <typename F>
httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const ValidationError& e) {
            send_error(res, 400, "invalid_request", e.what(), {{"field", e.field()}});
        } catch (const NotFoundError& e) {
            send_error(res, 404, "not_found", e.what());
        } catch (const TerminalStateError& e) {
            send_error(res, 409, "session_closed", e.what());
        } catch (const nlohmann::json::exception& e) {
            send_error(res, 400, "invalid_request", e.what());
        } catch (const std::exception& e) {
            spdlog::error("{} {}: {}", req.method, req.path, e.what());
            send_error(res, 500, "internal", "internal error");
        }
    };
}

}  // namespace

ApiServer::ApiServer(Service& service) : service_(service), http_(std::make_unique<httplib::Server>()) {
    const auto& config = service_.config();
    const auto threads = static_cast<std::size_t>(config.threads);
    http_->new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    http_->set_payload_max_length(config.max_body_bytes);
    routes();
}

ApiServer::~ApiServer() = default;

void ApiServer::routes() {
    auto& s = service_;
    const auto& config = s.config();

    const bool trust_forwarded = config.trust_forwarded;
    http_->set_logger([trust_forwarded](const httplib::Request& req, const httplib::Response& res) {
        auto client = req.remote_addr;
        if (trust_forwarded && req.has_header("X-Forwarded-For")) {
            client = req.get_header_value("X-Forwarded-For");
        }
        spdlog::info("{} {} {} -> {}", client, req.method, req.path, res.status);
    });

    if (!config.cors_origin.empty()) {
        const auto origin = config.cors_origin;
        http_->set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Origin", origin);
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        });
        http_->Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    }

    http_->set_error_handler([](const httplib::Request& req, httplib::Response& res) {
        if (res.body.empty()) {
            const int status = res.status;
            const std::string code = status == 404 ? "not_found" : status == 413 ? "payload_too_large" : "http_error";
            send_error(res, status, code, req.method + " " + req.path);
        }
    });

    http_->Get("/healthz", guarded([&s](const httplib::Request&, httplib::Response& res) {
                   send_json(res, 200, s.health());
               }));

    http_->Post("/sessions", guarded([&s](const httplib::Request& req, httplib::Response& res) {
                    const auto body = parse_body(req);
                    const auto created = s.create_session(string_field(body, "language"));
                    send_json(res, 201, {{"session_id", created.session_id}, {"first_prompt", to_json(created.prompt)}});
                }));

    http_->Get(R"(/sessions/([A-Za-z0-9_-]+))", guarded([&s](const httplib::Request& req, httplib::Response& res) {
                   const auto id = req.matches[1].str();
                   const auto state = s.state(id);
                   nlohmann::json transcript = nlohmann::json::array();
                   for (const auto& e : state.transcript) {
                       transcript.push_back({{"role", e.role}, {"text", e.text}});
                   }
                   nlohmann::json body{{"session_id", id},
                                       {"language", state.language},
                                       {"phase", dialogue::to_string(state.phase)},
                                       {"transcript", transcript},
                                       {"has_itinerary", state.current_itinerary.has_value()}};
                   if (auto p = s.prompt(id)) {
                       body["prompt"] = to_json(*p);
                   }
                   send_json(res, 200, body);
               }));

    http_->Post(R"(/sessions/([A-Za-z0-9_-]+)/messages)",
                guarded([&s](const httplib::Request& req, httplib::Response& res) {
                    const auto body = parse_body(req);
                    const auto reply = s.post_message(req.matches[1].str(), string_field(body, "text"));
                    nlohmann::json out{{"reply", reply.reply}, {"phase", dialogue::to_string(reply.phase)}};
                    if (reply.itinerary) {
                        out["itinerary"] = *reply.itinerary;
                    }
                    if (reply.prompt) {
                        out["prompt"] = to_json(*reply.prompt);
                    }
                    send_json(res, 200, out);
                }));

    http_->Post(R"(/sessions/([A-Za-z0-9_-]+)/feedback)",
                guarded([&s](const httplib::Request& req, httplib::Response& res) {
                    auto body = parse_body(req);
                    body["ts"] = 0;
                    s.add_feedback(req.matches[1].str(), body.get<dialogue::FeedbackEvent>());
                    send_json(res, 200, {{"status", "recorded"}});
                }));

    http_->Get(R"(/sessions/([A-Za-z0-9_-]+)/itinerary)",
               guarded([&s](const httplib::Request& req, httplib::Response& res) {
                   send_json(res, 200, s.itinerary(req.matches[1].str()));
               }));

    http_->Get(R"(/sessions/([A-Za-z0-9_-]+)/export)",
               guarded([&s](const httplib::Request& req, httplib::Response& res) {
                   const auto id = req.matches[1].str();
                   const auto format = req.has_param("format") ? req.get_param_value("format") : "markdown";
                   if (format == "html") {
                       res.set_content(s.export_html(id), "text/html; charset=utf-8");
                   } else if (format == "markdown" || format == "md") {
                       res.set_content(s.export_markdown(id), "text/markdown; charset=utf-8");
                       res.set_header("Content-Disposition", "attachment; filename=\"itinerary-" + id + ".md\"");
                   } else {
                       throw ValidationError("format", "expected markdown or html");
                   }
                   res.status = 200;
               }));
}

bool ApiServer::listen(const std::string& host, int port) {
    spdlog::info("listening on {}:{}", host, port);
    return http_->listen(host, port);
}

int ApiServer::bind_any(const std::string& host) {
    return http_->bind_to_any_port(host);
}

bool ApiServer::listen_after_bind() {
    return http_->listen_after_bind();
}

void ApiServer::stop() {
    http_->stop();
}

void ApiServer::wait_until_ready() const {
    http_->wait_until_ready();
}

}  // namespace itinera::api
