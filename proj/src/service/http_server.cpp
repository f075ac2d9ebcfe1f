#include "secgate/service/http_server.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>

namespace secgate::service {

using nlohmann::json;

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::Malformed:
    case ErrorCode::OutOfRange:
    case ErrorCode::StrategyMismatch:
    case ErrorCode::PlaceholderCount:
    case ErrorCode::DuplicateDimension:
    case ErrorCode::MissingDimension:
    case ErrorCode::CorpusTooSmall:
    case ErrorCode::EmptyCorpus:
    case ErrorCode::EmptyForm:
      return 400;
    case ErrorCode::NotFound: return 404;
    case ErrorCode::AlreadyAnswered:
    case ErrorCode::DuplicateId:
    case ErrorCode::DuplicateForm:
      return 409;
    case ErrorCode::Rejected: return 422;
    case ErrorCode::BackendAuth:
    case ErrorCode::BackendUpstream:
    case ErrorCode::MalformedReply:
      return 502;
    case ErrorCode::BackendUnavailable: return 503;
    default: return 500;
  }
}

std::optional<std::string> auth_token_from_env(const AppConfig& cfg) {
  if (!cfg.auth_token_env) return std::nullopt;
  const char* v = std::getenv(cfg.auth_token_env->c_str());
  if (!v || !*v) {
    throw Error(ErrorCode::ConfigInvalid,
                "auth token variable " + *cfg.auth_token_env + " is not set");
  }
  return std::string(v);
}

struct HttpServer::Impl {
  Gateway& gateway;
  std::optional<std::string> token;
  httplib::Server server;
  std::atomic<bool> run_started{false};
  std::atomic<bool> stop_requested{false};
  std::atomic<bool> finished{false};

  Impl(Gateway& g, std::optional<std::string> t) : gateway(g), token(std::move(t)) {}

  void send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
  }

  void send_error(httplib::Response& res, ErrorCode code, std::string_view message,
                  const json* verdict = nullptr) {
    json body = {{"error", {{"code", to_string(code)}, {"message", gateway.redact(message)}}}};
    if (verdict) body["verdict"] = *verdict;
    send(res, http_status(code), body);
  }

  template <typename F>
  void guarded(const httplib::Request& req, httplib::Response& res, F&& f) {
    try {
      if (token && req.path.rfind("/v1/", 0) == 0 &&
          req.get_header_value("Authorization") != "Bearer " + *token) {
        res.status = 401;
        res.set_header("WWW-Authenticate", "Bearer");
        res.set_content(R"({"error":{"code":"unauthorized","message":"missing or invalid bearer token"}})",
                        "application/json; charset=utf-8");
        return;
      }
      f();
    } catch (const RejectedError& e) {
      send_error(res, e.code(), e.what(), &e.verdict());
    } catch (const Error& e) {
      send_error(res, e.code(), e.what());
    } catch (const json::exception& e) {
      send_error(res, ErrorCode::InvalidArgument, e.what());
    } catch (const std::exception& e) {
      send_error(res, ErrorCode::Io, e.what());
    }
  }

  static json body_of(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
      return json::parse(req.body);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::Malformed, std::string("request body is not JSON: ") + e.what());
    }
  }

  void routes() {
    server.Get("/healthz", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(req, res, [&] { send(res, 200, gateway.health()); });
    });
    server.Post("/v1/evaluate", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(req, res, [&] { send(res, 200, gateway.evaluate(body_of(req))); });
    });
    server.Post("/v1/quiz", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(req, res, [&] { send(res, 201, gateway.create_quiz(body_of(req))); });
    });
    server.Get(R"(/v1/quiz/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(req, res, [&] { send(res, 200, gateway.get_quiz(req.matches[1])); });
    });
    server.Post(R"(/v1/quiz/([^/]+)/answer)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  guarded(req, res, [&] { send(res, 200, gateway.answer(req.matches[1], body_of(req))); });
                });
    server.Get(R"(/v1/quiz/([^/]+)/report)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(req, res, [&] { send(res, 200, gateway.quiz_report(req.matches[1])); });
               });
    server.Post("/v1/simulate", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(req, res, [&] { send(res, 200, gateway.simulate(body_of(req))); });
    });
    server.Get("/v1/simulate/reports", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(req, res, [&] { send(res, 200, gateway.simulation_reports()); });
    });
    server.Post("/v1/feedback", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(req, res, [&] { send(res, 201, gateway.feedback(body_of(req))); });
    });
    server.set_error_handler([this](const httplib::Request&, httplib::Response& res) {
      if (!res.body.empty()) return;
      const auto code = res.status == 404 ? ErrorCode::NotFound : ErrorCode::InvalidArgument;
      json body = {{"error", {{"code", to_string(code)}, {"message", "no such route"}}}};
      if (res.status != 404) body["error"]["message"] = "request could not be handled";
      res.set_content(body.dump(), "application/json; charset=utf-8");
    });
  }
};

HttpServer::HttpServer(Gateway& gateway, std::optional<std::string> auth_token)
    : impl_(std::make_unique<Impl>(gateway, std::move(auth_token))) {
  impl_->routes();
  // httplib defaults to SO_REUSEPORT, which lets a second server share the port
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound <= 0) throw Error(ErrorCode::BindFailure, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::BindFailure, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::run() {
  impl_->run_started = true;
  if (!impl_->stop_requested) impl_->server.listen_after_bind();
  impl_->finished = true;
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->stop_requested = true;
  if (!impl_->run_started) return;
  while (!impl_->finished && !impl_->server.is_running()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace secgate::service
