#pragma once

#include <memory>
#include <optional>
#include <string>

#include "secgate/core/error.hpp"
#include "secgate/service/gateway.hpp"

namespace secgate::service {

int http_status(ErrorCode code) noexcept;

// Thin HTTP adapter over a Gateway. Handlers run on the server's thread pool.
class HttpServer {
 public:
  // auth_token, when set, is required as "Authorization: Bearer <token>" on
  // every /v1 route.
  HttpServer(Gateway& gateway, std::optional<std::string> auth_token);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Returns the bound port (port 0 picks one). Throws BindFailure.
  int bind(const std::string& host, int port);
  // Blocks until stop(); in-flight requests finish before it returns.
  void run();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Reads the bearer token named by cfg.auth_token_env. Throws ConfigInvalid
// when the variable is named but unset.
std::optional<std::string> auth_token_from_env(const AppConfig& cfg);

}  // namespace secgate::service
