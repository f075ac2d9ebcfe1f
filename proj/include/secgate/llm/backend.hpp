#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace secgate::llm {

enum class BackendKind { HttpChat, ScriptedMock };

// One row of a scripted mock's match table. An empty matcher is the
// catch-all.
struct ScriptedReply {
  std::string matcher;
  std::string reply;
};

struct BackendConfig {
  BackendKind kind = BackendKind::ScriptedMock;
  std::string endpoint_url;  // HttpChat only
  std::string model_name;
  std::string api_key_env;  // name of the env var, never the value
  std::chrono::milliseconds timeout{30000};
  int max_tokens = 512;
  double temperature = 0.0;
  std::vector<ScriptedReply> script;  // ScriptedMock only

  // Throws ConfigInvalid.
  void validate() const;
};

// Reads a backend block. `script_file` entries are resolved relative to
// base_dir.
BackendConfig backend_config_from_json(const nlohmann::json& j,
                                       const std::string& base_dir = ".");
nlohmann::json to_json(const BackendConfig& cfg);

struct SamplingParams {
  std::optional<double> temperature;
  std::optional<int> max_tokens;
};

struct ChatRequest {
  std::string system;
  std::string user;
  // Opaque reference forwarded to multimodal endpoints as an image part.
  std::optional<std::string> image_ref;
  SamplingParams params;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string generate(const ChatRequest& req) const = 0;
};

// Replies by first substring match against the user message. Requires a
// catch-all entry so every request has an answer. "{{system}}" and "{{user}}"
// in a reply are replaced by the request's messages.
class ScriptedBackend final : public ChatBackend {
 public:
  explicit ScriptedBackend(std::vector<ScriptedReply> script);
  std::string generate(const ChatRequest& req) const override;

 private:
  std::vector<ScriptedReply> script_;
};

// OpenAI-compatible POST {endpoint}/v1/chat/completions.
class HttpChatBackend final : public ChatBackend {
 public:
  explicit HttpChatBackend(BackendConfig cfg);
  std::string generate(const ChatRequest& req) const override;

  // Request body the client sends; exposed for wire-format tests.
  nlohmann::json build_body(const ChatRequest& req) const;

 private:
  BackendConfig cfg_;
  std::string host_;  // scheme://host:port
  std::string path_;
};

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& cfg);

// Single-shot convenience over make_backend(cfg)->generate(req).
std::string generate(const ChatRequest& req, const BackendConfig& cfg);

}  // namespace secgate::llm
