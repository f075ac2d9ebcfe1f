#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "secgate/attack/attack.hpp"
#include "secgate/core/error.hpp"
#include "secgate/qa_pair.hpp"
#include "secgate/service/config.hpp"
#include "secgate/service/session_store.hpp"

namespace secgate::service {

// Raised when user-supplied content fails the gate before reaching a prompt.
class RejectedError : public Error {
 public:
  explicit RejectedError(nlohmann::json verdict)
      : Error(ErrorCode::Rejected, "input rejected by the evaluation gate"),
        verdict_(std::move(verdict)) {}
  const nlohmann::json& verdict() const noexcept { return verdict_; }

 private:
  nlohmann::json verdict_;
};

// Transport-independent service: each handler takes and returns the JSON
// bodies of the HTTP API and throws secgate::Error on failure.
class Gateway {
 public:
  // Builds backends, loads corpora and prepares data_dir. Throws
  // ConfigInvalid, Io, MalformedLineError.
  explicit Gateway(AppConfig cfg);

  nlohmann::json health() const;
  nlohmann::json evaluate(const nlohmann::json& req) const;
  nlohmann::json create_quiz(const nlohmann::json& req);
  nlohmann::json get_quiz(const std::string& id) const;
  nlohmann::json answer(const std::string& id, const nlohmann::json& req);
  nlohmann::json quiz_report(const std::string& id) const;
  nlohmann::json simulate(const nlohmann::json& req);
  nlohmann::json simulation_reports() const;
  nlohmann::json feedback(const nlohmann::json& req);

  // Replaces every canary and configured credential value with a marker.
  std::string redact(std::string_view message) const;

  const AppConfig& config() const noexcept { return cfg_; }
  const std::vector<QAPair>& corpus() const noexcept { return corpus_; }
  const std::vector<attack::AttackPayload>& payloads() const noexcept { return payloads_; }
  const llm::ChatBackend& backend(const std::string& name) const;
  SessionStore& store() noexcept { return *store_; }

 private:
  void append_line(const std::string& file, const nlohmann::json& record);

  AppConfig cfg_;
  std::map<std::string, std::unique_ptr<llm::ChatBackend>> backends_;
  std::vector<QAPair> corpus_;
  std::vector<attack::AttackPayload> payloads_;
  std::unique_ptr<SessionStore> store_;
  std::vector<std::string> secrets_;
  mutable std::mutex append_mutex_;
};

}  // namespace secgate::service
