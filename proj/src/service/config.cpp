#include "secgate/service/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>

#include "secgate/core/error.hpp"

namespace secgate::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string resolve(const std::string& base_dir, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base_dir) / p).lexically_normal().string();
}

void parse_listen(const std::string& listen, AppConfig& cfg) {
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::ConfigInvalid, "listen must be host:port");
  cfg.host = listen.substr(0, colon);
  const auto port_text = listen.substr(colon + 1);
  int port = -1;
  const auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port < 0 || port > 65535) {
    throw Error(ErrorCode::ConfigInvalid, "invalid port in listen address '" + listen + "'");
  }
  cfg.port = port;
}

attack::TargetProfile target_from_json(const json& j) {
  attack::TargetProfile t;
  t.name = j.at("name").get<std::string>();
  t.system_prompt = j.at("system_prompt").get<std::string>();
  t.canaries = j.value("canaries", std::vector<std::string>{});
  t.backend = j.value("backend", std::string{"default"});
  return t;
}

}  // namespace

void AppConfig::validate() const {
  if (!backends.count("default")) {
    throw Error(ErrorCode::ConfigInvalid, "a backend named \"default\" is required");
  }
  for (const auto& [name, b] : backends) b.validate();
  if (!backends.count(gate_backend)) {
    throw Error(ErrorCode::ConfigInvalid, "gate backend '" + gate_backend + "' is not configured");
  }
  policy.validate();
  if (quiz.k < 2 || quiz.n == 0) throw Error(ErrorCode::ConfigInvalid, "quiz needs n >= 1 and k >= 2");
  if (data_dir.empty()) throw Error(ErrorCode::ConfigInvalid, "data_dir is required");
  for (const auto& [name, t] : targets) {
    t.validate();
    if (!backends.count(t.backend)) {
      throw Error(ErrorCode::ConfigInvalid,
                  "target '" + name + "' uses unknown backend '" + t.backend + "'");
    }
  }
}

AppConfig config_from_json(const json& j, const std::string& base_dir) {
  AppConfig cfg;
  try {
    if (!j.is_object()) throw Error(ErrorCode::ConfigInvalid, "config must be a JSON object");
    if (j.contains("listen")) parse_listen(j.at("listen").get<std::string>(), cfg);
    cfg.data_dir = resolve(base_dir, j.value("data_dir", cfg.data_dir));
    for (const auto& [name, b] : j.at("backends").items()) {
      cfg.backends[name] = llm::backend_config_from_json(b, base_dir);
    }
    cfg.gate_backend = j.value("gate_backend", cfg.gate_backend);
    if (j.contains("policy")) {
      cfg.policy = gate::policy_from_json(j.at("policy"));
    } else if (j.contains("policy_file")) {
      cfg.policy = gate::load_policy(resolve(base_dir, j.at("policy_file").get<std::string>()));
    }
    if (j.contains("quiz")) {
      const auto& q = j.at("quiz");
      cfg.quiz.n = q.value("n", cfg.quiz.n);
      cfg.quiz.k = q.value("k", cfg.quiz.k);
      cfg.quiz.corpus_path = resolve(base_dir, q.value("corpus", std::string{}));
    }
    for (const auto& t : j.value("targets", json::array())) {
      auto profile = target_from_json(t);
      const auto name = profile.name;
      if (!cfg.targets.emplace(name, std::move(profile)).second) {
        throw Error(ErrorCode::ConfigInvalid, "duplicate target '" + name + "'");
      }
    }
    cfg.payloads_path = resolve(base_dir, j.value("payloads", std::string{}));
    if (j.contains("auth_token_env")) cfg.auth_token_env = j.at("auth_token_env").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    throw Error(ErrorCode::ConfigInvalid, std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigInvalid, "config " + path + ": " + e.what());
  }
  const auto base = fs::path(path).parent_path().string();
  return config_from_json(j, base.empty() ? "." : base);
}

json to_json(const AppConfig& cfg) {
  json backends = json::object();
  for (const auto& [name, b] : cfg.backends) {
    // scripted replies may quote target canaries, so only their count is kept
    auto entry = llm::to_json(b);
    if (entry.contains("script")) {
      entry["script_entries"] = entry["script"].size();
      entry.erase("script");
    }
    backends[name] = std::move(entry);
  }
  json targets = json::array();
  for (const auto& [name, t] : cfg.targets) {
    targets.push_back({{"name", t.name}, {"backend", t.backend}});
  }
  json j = {{"listen", cfg.host + ":" + std::to_string(cfg.port)},
            {"data_dir", cfg.data_dir},
            {"backends", backends},
            {"gate_backend", cfg.gate_backend},
            {"policy", gate::to_json(cfg.policy)},
            {"quiz", {{"n", cfg.quiz.n}, {"k", cfg.quiz.k}, {"corpus", cfg.quiz.corpus_path}}},
            {"targets", targets},
            {"payloads", cfg.payloads_path}};
  if (cfg.auth_token_env) j["auth_token_env"] = *cfg.auth_token_env;
  return j;
}

}  // namespace secgate::service
