#include "secgate/service/gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "secgate/gate/gate.hpp"
#include "secgate/quiz/quiz.hpp"

namespace secgate::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kRedacted = "[redacted]";

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

template <typename T>
T field(const json& req, const char* key, T fallback) {
  if (!req.contains(key) || req[key].is_null()) return fallback;
  try {
    return req[key].get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::InvalidArgument, std::string("field \"") + key + "\" has the wrong type");
  }
}

void require_object(const json& req) {
  if (!req.is_object()) throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
}

}  // namespace

Gateway::Gateway(AppConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  for (const auto& [name, b] : cfg_.backends) {
    backends_[name] = llm::make_backend(b);
    if (!b.api_key_env.empty()) {
      if (const char* v = std::getenv(b.api_key_env.c_str()); v && *v) secrets_.emplace_back(v);
    }
  }
  if (cfg_.auth_token_env) {
    if (const char* v = std::getenv(cfg_.auth_token_env->c_str()); v && *v) secrets_.emplace_back(v);
  }
  for (const auto& [name, t] : cfg_.targets) {
    secrets_.insert(secrets_.end(), t.canaries.begin(), t.canaries.end());
  }
  if (!cfg_.quiz.corpus_path.empty()) corpus_ = quiz::load_corpus(cfg_.quiz.corpus_path);
  if (!cfg_.payloads_path.empty()) payloads_ = attack::load_payloads(cfg_.payloads_path);
  store_ = std::make_unique<FileSessionStore>(fs::path(cfg_.data_dir) / "sessions");
}

const llm::ChatBackend& Gateway::backend(const std::string& name) const {
  const auto it = backends_.find(name);
  if (it == backends_.end()) throw Error(ErrorCode::NotFound, "no backend named '" + name + "'");
  return *it->second;
}

std::string Gateway::redact(std::string_view message) const {
  std::string out(message);
  for (const auto& secret : secrets_) {
    if (secret.empty()) continue;
    for (auto pos = out.find(secret); pos != std::string::npos;
         pos = out.find(secret, pos + kRedacted.size())) {
      out.replace(pos, secret.size(), kRedacted);
    }
  }
  return out;
}

json Gateway::health() const {
  json backends = json::array();
  for (const auto& [name, b] : backends_) backends.push_back(name);
  json targets = json::array();
  for (const auto& [name, t] : cfg_.targets) targets.push_back(name);
  json payloads = json::array();
  for (const auto& p : payloads_) {
    payloads.push_back({{"id", p.id}, {"kind", attack::name(p.kind)}, {"description", p.description}});
  }
  return {{"status", "ok"},
          {"service", "secgate"},
          {"version", SECGATE_VERSION},
          {"compiler", __VERSION__},
          {"cplusplus", __cplusplus},
          {"backends", backends},
          {"targets", targets},
          {"payloads", payloads},
          {"strategies", {"identity", "base64", "roleplay", "split"}},
          {"quiz", {{"corpus_size", corpus_.size()}, {"n", cfg_.quiz.n}, {"k", cfg_.quiz.k}}},
          {"policy", gate::to_json(cfg_.policy)}};
}

json Gateway::evaluate(const json& req) const {
  require_object(req);
  const auto text = field<std::string>(req, "text", "");
  std::optional<std::string> image_ref;
  if (req.contains("image_ref") && !req["image_ref"].is_null()) {
    image_ref = field<std::string>(req, "image_ref", "");
  }
  return gate::to_json(gate::evaluate(text, backend(cfg_.gate_backend), cfg_.policy, image_ref));
}

json Gateway::create_quiz(const json& req) {
  require_object(req);
  if (corpus_.empty()) throw Error(ErrorCode::NotFound, "no quiz corpus is configured");
  const auto n = field<std::size_t>(req, "n", cfg_.quiz.n);
  const auto k = field<std::size_t>(req, "k", cfg_.quiz.k);
  const auto seed = field<std::uint64_t>(req, "seed", std::random_device{}() * 0x100000000ull +
                                                          std::random_device{}());
  const auto topic = field<std::string>(req, "topic", "");

  std::vector<QAPair> pool;
  for (const auto& p : corpus_) {
    if (topic.empty() || p.topic == topic) pool.push_back(p);
  }
  auto session = quiz::make_quiz(pool, n, k, seed);
  const auto lock = store_->lock_for(session.session_id);
  std::lock_guard guard(*lock);
  if (store_->exists(session.session_id)) {
    throw Error(ErrorCode::DuplicateId, "session " + session.session_id + " already exists");
  }
  store_->persist(session);
  return quiz::public_view(session);
}

json Gateway::get_quiz(const std::string& id) const {
  return quiz::public_view(store_->load(id));
}

json Gateway::answer(const std::string& id, const json& req) {
  require_object(req);
  if (!req.contains("index") || !req.contains("choice")) {
    throw Error(ErrorCode::InvalidArgument, "\"index\" and \"choice\" are required");
  }
  const auto index = field<std::size_t>(req, "index", 0);
  const auto choice = field<std::size_t>(req, "choice", 0);
  return store_->with_session(id, [&](quiz::QuizSession& s) {
    const auto r = quiz::grade(s, index, choice);
    return json{{"index", index},
                {"correct", r.correct},
                {"correct_index", s.items[index].correct_index},
                {"suggestion", r.suggestion ? json(*r.suggestion) : json(nullptr)}};
  });
}

json Gateway::quiz_report(const std::string& id) const {
  auto j = quiz::to_json(quiz::session_report(store_->load(id)));
  j["session_id"] = id;
  return j;
}

json Gateway::simulate(const json& req) {
  require_object(req);
  attack::CampaignEntry entry;
  bool inline_body = false;
  if (req.contains("payload") && req["payload"].is_object()) {
    auto p = req["payload"];
    if (!p.contains("id")) p["id"] = "custom";
    try {
      entry.payload = attack::payload_from_json(p);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidArgument, std::string("payload: ") + e.what());
    }
    inline_body = true;
  } else {
    const auto id = field<std::string>(req, "payload_id", "");
    const auto it = std::find_if(payloads_.begin(), payloads_.end(),
                                 [&](const attack::AttackPayload& p) { return p.id == id; });
    if (it == payloads_.end()) throw Error(ErrorCode::NotFound, "no payload '" + id + "'");
    entry.payload = *it;
  }

  try {
    entry.strategy = attack::strategy_from_json(req.contains("strategy") ? req["strategy"] : json("identity"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("strategy: ") + e.what());
  }

  std::string target_name = field<std::string>(req, "target", "");
  if (target_name.empty() && cfg_.targets.size() == 1) target_name = cfg_.targets.begin()->first;
  const auto t = cfg_.targets.find(target_name);
  if (t == cfg_.targets.end()) throw Error(ErrorCode::NotFound, "no target '" + target_name + "'");
  entry.target = t->second;

  // user-authored text passes the gate before it reaches any prompt
  if (inline_body) {
    std::string text = entry.payload.body;
    if (const auto* r = std::get_if<attack::RolePlayFrame>(&entry.strategy)) text += "\n" + r->persona;
    const auto verdict = gate::evaluate(text, backend(cfg_.gate_backend), cfg_.policy);
    if (verdict.decision == gate::Decision::Reject) throw RejectedError(gate::to_json(verdict));
  } else if (const auto* r = std::get_if<attack::RolePlayFrame>(&entry.strategy);
             r && req["strategy"].is_object() && req["strategy"].contains("persona")) {
    const auto verdict = gate::evaluate(r->persona, backend(cfg_.gate_backend), cfg_.policy);
    if (verdict.decision == gate::Decision::Reject) throw RejectedError(gate::to_json(verdict));
  }

  // validates strategy/kind compatibility before anything is sent
  (void)attack::wrap(entry.payload, entry.strategy);

  std::map<std::string, const llm::ChatBackend*> backends;
  for (const auto& [name, b] : backends_) backends[name] = b.get();
  auto report = attack::run_campaign({entry}, backends).front();
  if (report.verdict == attack::Verdict::Failed) report.error = redact(report.error);
  auto j = attack::to_json(report);
  append_line("reports.jsonl", j);
  return j;
}

json Gateway::simulation_reports() const {
  json out = json::array();
  std::lock_guard guard(append_mutex_);
  std::ifstream in(fs::path(cfg_.data_dir) / "reports.jsonl");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error&) {
      // a torn trailing line from a crash is skipped
    }
  }
  return out;
}

json Gateway::feedback(const json& req) {
  require_object(req);
  quiz::Feedback f;
  try {
    f = quiz::feedback_from_json(req);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("feedback: ") + e.what());
  }
  auto record = quiz::to_json(f);
  record["received_ms"] = now_ms();
  append_line("feedback.jsonl", record);
  return {{"status", "recorded"}, {"feedback", record}};
}

void Gateway::append_line(const std::string& file, const json& record) {
  std::lock_guard guard(append_mutex_);
  const auto path = fs::path(cfg_.data_dir) / file;
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot append to " + path.string());
  out << record.dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace secgate::service
