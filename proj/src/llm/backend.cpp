#include "secgate/llm/backend.hpp"

#include <httplib.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "secgate/core/error.hpp"

namespace secgate::llm {

using nlohmann::json;

void BackendConfig::validate() const {
  if (kind == BackendKind::HttpChat) {
    if (endpoint_url.empty()) {
      throw Error(ErrorCode::ConfigInvalid, "http backend requires endpoint_url");
    }
    if (endpoint_url.rfind("http://", 0) != 0 &&
        endpoint_url.rfind("https://", 0) != 0) {
      throw Error(ErrorCode::ConfigInvalid,
                  "endpoint_url must start with http:// or https://");
    }
  } else {
    bool has_catch_all = false;
    for (const auto& entry : script) has_catch_all |= entry.matcher.empty();
    if (!has_catch_all) {
      throw Error(ErrorCode::ConfigInvalid,
                  "scripted backend requires a catch-all entry (empty matcher)");
    }
  }
  if (max_tokens <= 0) {
    throw Error(ErrorCode::ConfigInvalid, "max_tokens must be positive");
  }
  if (!(temperature >= 0.0)) {
    throw Error(ErrorCode::ConfigInvalid, "temperature must be non-negative");
  }
  if (timeout.count() <= 0) {
    throw Error(ErrorCode::ConfigInvalid, "timeout must be positive");
  }
}

namespace {

std::vector<ScriptedReply> script_from_json(const json& arr) {
  std::vector<ScriptedReply> out;
  for (const auto& e : arr) {
    out.push_back({e.value("match", std::string{}), e.at("reply").get<std::string>()});
  }
  return out;
}

}  // namespace

BackendConfig backend_config_from_json(const json& j, const std::string& base_dir) {
  BackendConfig cfg;
  try {
    const auto kind = j.value("kind", std::string{"mock"});
    if (kind == "http" || kind == "http_chat") {
      cfg.kind = BackendKind::HttpChat;
    } else if (kind == "mock" || kind == "scripted") {
      cfg.kind = BackendKind::ScriptedMock;
    } else {
      throw Error(ErrorCode::ConfigInvalid, "unknown backend kind '" + kind + "'");
    }
    cfg.endpoint_url = j.value("endpoint_url", std::string{});
    cfg.model_name = j.value("model", std::string{});
    cfg.api_key_env = j.value("api_key_env", std::string{});
    cfg.timeout = std::chrono::milliseconds(j.value("timeout_ms", 30000));
    cfg.max_tokens = j.value("max_tokens", 512);
    cfg.temperature = j.value("temperature", 0.0);
    if (j.contains("script")) cfg.script = script_from_json(j.at("script"));
    if (j.contains("script_file")) {
      auto path = std::filesystem::path(j.at("script_file").get<std::string>());
      if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
      std::ifstream in(path);
      if (!in) {
        throw Error(ErrorCode::ConfigInvalid, "cannot open script_file " + path.string());
      }
      auto more = script_from_json(json::parse(in));
      cfg.script.insert(cfg.script.end(), more.begin(), more.end());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("backend config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json to_json(const BackendConfig& cfg) {
  json j;
  j["kind"] = cfg.kind == BackendKind::HttpChat ? "http" : "mock";
  if (!cfg.endpoint_url.empty()) j["endpoint_url"] = cfg.endpoint_url;
  if (!cfg.model_name.empty()) j["model"] = cfg.model_name;
  if (!cfg.api_key_env.empty()) j["api_key_env"] = cfg.api_key_env;
  j["timeout_ms"] = cfg.timeout.count();
  j["max_tokens"] = cfg.max_tokens;
  j["temperature"] = cfg.temperature;
  if (!cfg.script.empty()) {
    json arr = json::array();
    for (const auto& e : cfg.script) arr.push_back({{"match", e.matcher}, {"reply", e.reply}});
    j["script"] = std::move(arr);
  }
  return j;
}

ScriptedBackend::ScriptedBackend(std::vector<ScriptedReply> script)
    : script_(std::move(script)) {
  bool has_catch_all = false;
  for (const auto& entry : script_) has_catch_all |= entry.matcher.empty();
  if (!has_catch_all) {
    throw Error(ErrorCode::ConfigInvalid, "scripted backend requires a catch-all entry");
  }
}

std::string ScriptedBackend::generate(const ChatRequest& req) const {
  if (req.user.empty()) throw Error(ErrorCode::InvalidArgument, "empty user message");
  for (const auto& entry : script_) {
    if (req.user.find(entry.matcher) == std::string::npos) continue;
    // one pass, so substituted text is never expanded again
    constexpr std::string_view kSystem = "{{system}}", kUser = "{{user}}";
    const std::string_view tmpl = entry.reply;
    std::string reply;
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
      if (tmpl.substr(pos, kSystem.size()) == kSystem) {
        reply += req.system;
        pos += kSystem.size();
      } else if (tmpl.substr(pos, kUser.size()) == kUser) {
        reply += req.user;
        pos += kUser.size();
      } else {
        reply += tmpl[pos++];
      }
    }
    return reply;
  }
  // unreachable: the constructor guarantees a catch-all
  return {};
}

HttpChatBackend::HttpChatBackend(BackendConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const auto scheme_end = cfg_.endpoint_url.find("://") + 3;
  const auto path_start = cfg_.endpoint_url.find('/', scheme_end);
  host_ = cfg_.endpoint_url.substr(0, path_start);
  std::string path =
      path_start == std::string::npos ? std::string{} : cfg_.endpoint_url.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  if (path.size() >= 17 && path.compare(path.size() - 17, 17, "/chat/completions") == 0) {
    path_ = path;
  } else if (path.size() >= 3 && path.compare(path.size() - 3, 3, "/v1") == 0) {
    path_ = path + "/chat/completions";
  } else {
    path_ = path + "/v1/chat/completions";
  }
}

json HttpChatBackend::build_body(const ChatRequest& req) const {
  json messages = json::array();
  if (!req.system.empty()) {
    messages.push_back({{"role", "system"}, {"content", req.system}});
  }
  if (req.image_ref) {
    json parts = json::array();
    parts.push_back({{"type", "text"}, {"text", req.user}});
    parts.push_back({{"type", "image_url"}, {"image_url", {{"url", *req.image_ref}}}});
    messages.push_back({{"role", "user"}, {"content", std::move(parts)}});
  } else {
    messages.push_back({{"role", "user"}, {"content", req.user}});
  }
  return {
      {"model", cfg_.model_name},
      {"messages", std::move(messages)},
      {"temperature", req.params.temperature.value_or(cfg_.temperature)},
      {"max_tokens", req.params.max_tokens.value_or(cfg_.max_tokens)},
  };
}

std::string HttpChatBackend::generate(const ChatRequest& req) const {
  if (req.user.empty()) throw Error(ErrorCode::InvalidArgument, "empty user message");

  httplib::Headers headers;
  if (!cfg_.api_key_env.empty()) {
    const char* key = std::getenv(cfg_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw Error(ErrorCode::BackendAuth,
                  "credential variable " + cfg_.api_key_env + " is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const std::string body = build_body(req).dump();

  httplib::Client client(host_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout);
  const auto usecs =
      std::chrono::duration_cast<std::chrono::microseconds>(cfg_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  // one retry on transport failure, none on HTTP-level errors
  httplib::Result res = client.Post(path_, headers, body, "application/json");
  if (!res) res = client.Post(path_, headers, body, "application/json");
  if (!res) {
    throw Error(ErrorCode::BackendUnavailable,
                "transport error contacting " + host_ + ": " + httplib::to_string(res.error()));
  }
  if (res->status == 401 || res->status == 403) {
    throw Error(ErrorCode::BackendAuth,
                "credential rejected (HTTP " + std::to_string(res->status) + ")");
  }
  if (res->status < 200 || res->status >= 300) {
    throw UpstreamError(res->status, res->body);
  }
  try {
    const auto reply = json::parse(res->body);
    const auto& content = reply.at("choices").at(0).at("message").at("content");
    if (content.is_null()) return {};
    return content.get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedReply,
                std::string("unexpected chat completion body: ") + e.what());
  }
}

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& cfg) {
  if (cfg.kind == BackendKind::HttpChat) return std::make_unique<HttpChatBackend>(cfg);
  return std::make_unique<ScriptedBackend>(cfg.script);
}

std::string generate(const ChatRequest& req, const BackendConfig& cfg) {
  return make_backend(cfg)->generate(req);
}

}  // namespace secgate::llm
