#pragma once

#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "secgate/attack/attack.hpp"
#include "secgate/gate/gate.hpp"
#include "secgate/llm/backend.hpp"

namespace secgate::service {

struct QuizDefaults {
  std::size_t n = 10;
  std::size_t k = 4;
  std::string corpus_path;  // JSON-lines; empty disables the quiz endpoints
};

struct AppConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string data_dir = "data/runtime";
  std::map<std::string, llm::BackendConfig> backends;
  std::string gate_backend = "default";
  gate::GatePolicy policy;
  QuizDefaults quiz;
  std::map<std::string, attack::TargetProfile> targets;
  std::string payloads_path;
  // Name of the env var holding the static bearer token; unset disables auth.
  std::optional<std::string> auth_token_env;

  // Throws ConfigInvalid.
  void validate() const;
};

// Relative paths inside the document are resolved against base_dir.
// Throws ConfigInvalid.
AppConfig config_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
AppConfig load_config(const std::string& path);

// Credential values are never included, only env var names.
nlohmann::json to_json(const AppConfig& cfg);

}  // namespace secgate::service
