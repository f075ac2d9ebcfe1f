#include "secgate/secgate.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "secgate/core/error.hpp"
#include "secgate/core/text.hpp"
#include "secgate/llm/qa.hpp"
#include "secgate/service/config.hpp"
#include "secgate/service/gateway.hpp"
#include "secgate/service/http_server.hpp"
#include "secgate/vet/model.hpp"
#include "secgate/vet/tokenizer.hpp"
#include "secgate/vet/trainer.hpp"

using nlohmann::json;
using secgate::Error;
using secgate::ErrorCode;

struct sg_gateway {
  std::unique_ptr<secgate::service::Gateway> gateway;
  std::unique_ptr<secgate::service::HttpServer> server;
};

namespace {

thread_local std::string g_last_error;
std::mutex g_vet_job;

sg_status status_of(ErrorCode c) { return static_cast<sg_status>(static_cast<int>(c) + 1); }

static_assert(SG_E_INVALID_ARGUMENT == static_cast<int>(ErrorCode::InvalidArgument) + 1);
static_assert(SG_E_CORRUPT == static_cast<int>(ErrorCode::Corrupt) + 1);
static_assert(SG_E_REJECTED == static_cast<int>(ErrorCode::Rejected) + 1);

sg_status fail(sg_status s, std::string message) {
  g_last_error = std::move(message);
  return s;
}

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

// Runs f, converting exceptions to a status and the thread's last error.
template <typename F>
sg_status guarded(const sg_gateway* gw, F&& f) {
  g_last_error.clear();
  auto redact = [gw](std::string m) {
    return gw && gw->gateway ? gw->gateway->redact(m) : m;
  };
  try {
    f();
    return SG_OK;
  } catch (const secgate::service::RejectedError& e) {
    return fail(status_of(e.code()), redact(std::string(e.what()) + ": " + e.verdict().dump()));
  } catch (const Error& e) {
    return fail(status_of(e.code()), redact(e.what()));
  } catch (const json::exception& e) {
    return fail(SG_E_INVALID_ARGUMENT, redact(e.what()));
  } catch (const std::bad_alloc&) {
    return fail(SG_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SG_E_INTERNAL, redact(e.what()));
  }
}

json parse_request(const char* text) {
  if (!text || !*text) return json::object();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Malformed, std::string("request is not JSON: ") + e.what());
  }
}

void check_out(const void* p) {
  if (!p) throw Error(ErrorCode::InvalidArgument, "null output pointer");
}

secgate::service::Gateway& need(sg_gateway* gw) {
  if (!gw || !gw->gateway) throw Error(ErrorCode::InvalidArgument, "null gateway handle");
  return *gw->gateway;
}

std::string need_str(const char* s, const char* what) {
  if (!s) throw Error(ErrorCode::InvalidArgument, std::string(what) + " is null");
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> non_empty_lines(const std::string& text) {
  std::vector<std::string> out;
  for (auto line : secgate::text::split_lines(text)) {
    if (!secgate::text::trim(line).empty()) out.emplace_back(line);
  }
  return out;
}

std::vector<std::string> expansion_forms(const json& req) {
  std::vector<std::string> forms;
  if (req.contains("expansion")) forms = req.at("expansion").get<std::vector<std::string>>();
  if (req.contains("expansion_file")) {
    for (auto& f : non_empty_lines(read_file(req.at("expansion_file").get<std::string>()))) {
      forms.push_back(std::move(f));
    }
  }
  return forms;
}

}  // namespace

extern "C" {

const char* sg_version(void) { return SECGATE_VERSION; }

const char* sg_status_name(sg_status status) {
  switch (status) {
    case SG_OK: return "ok";
    case SG_E_BUSY: return "busy";
    case SG_E_INTERNAL: return "internal";
    default: break;
  }
  const int c = static_cast<int>(status) - 1;
  if (c < 0 || c > static_cast<int>(ErrorCode::Rejected)) return "unknown";
  return secgate::to_string(static_cast<ErrorCode>(c));
}

const char* sg_last_error(void) { return g_last_error.c_str(); }

void sg_string_free(char* s) { std::free(s); }

sg_status sg_gateway_open(const char* config_path, sg_gateway** out) {
  return guarded(nullptr, [&] {
    check_out(out);
    *out = nullptr;
    auto cfg = secgate::service::load_config(need_str(config_path, "config path"));
    auto gw = std::make_unique<sg_gateway>();
    gw->gateway = std::make_unique<secgate::service::Gateway>(std::move(cfg));
    *out = gw.release();
  });
}

void sg_gateway_close(sg_gateway* gw) {
  if (!gw) return;
  if (gw->server) gw->server->stop();
  delete gw;
}

sg_status sg_health(sg_gateway* gw, char** out_json) {
  return guarded(gw, [&] {
    check_out(out_json);
    *out_json = dup_string(need(gw).health().dump());
  });
}

sg_status sg_evaluate(sg_gateway* gw, const char* request_json, char** out_json) {
  return guarded(gw, [&] {
    check_out(out_json);
    *out_json = dup_string(need(gw).evaluate(parse_request(request_json)).dump());
  });
}

sg_status sg_quiz_create(sg_gateway* gw, const char* request_json, char** out_json) {
  return guarded(gw, [&] {
    check_out(out_json);
    *out_json = dup_string(need(gw).create_quiz(parse_request(request_json)).dump());
  });
}

sg_status sg_quiz_get(sg_gateway* gw, const char* session_id, char** out_json) {
  return guarded(gw, [&] {
    check_out(out_json);
    *out_json = dup_string(need(gw).get_quiz(need_str(session_id, "session id")).dump());
  });
}

sg_status sg_quiz_answer(sg_gateway* gw, const char* session_id, const char* request_json,
                         char** out_json) {
  return guarded(gw, [&] {
    check_out(out_json);
    *out_json = dup_string(
        need(gw).answer(need_str(session_id, "session id"), parse_request(request_json)).dump());
  });
}

sg_status sg_quiz_report(sg_gateway* gw, const char* session_id, char** out_json) {
  return guarded(gw, [&] {
    check_out(out_json);
    *out_json = dup_string(need(gw).quiz_report(need_str(session_id, "session id")).dump());
  });
}

sg_status sg_simulate(sg_gateway* gw, const char* request_json, char** out_json) {
  return guarded(gw, [&] {
    check_out(out_json);
    *out_json = dup_string(need(gw).simulate(parse_request(request_json)).dump());
  });
}

sg_status sg_simulate_reports(sg_gateway* gw, char** out_json) {
  return guarded(gw, [&] {
    check_out(out_json);
    *out_json = dup_string(need(gw).simulation_reports().dump());
  });
}

sg_status sg_feedback(sg_gateway* gw, const char* request_json, char** out_json) {
  return guarded(gw, [&] {
    check_out(out_json);
    *out_json = dup_string(need(gw).feedback(parse_request(request_json)).dump());
  });
}

sg_status sg_corpus_build(sg_gateway* gw, const char* request_json, char** out_json) {
  return guarded(gw, [&] {
    check_out(out_json);
    auto& g = need(gw);
    const auto req = parse_request(request_json);
    const auto topic = req.at("topic").get<std::string>();
    const auto n = req.at("n").get<std::size_t>();
    const auto& backend = g.backend(req.value("backend", std::string{"default"}));
    json out = json::array();
    for (const auto& p : secgate::llm::generate_qa(topic, n, backend)) {
      out.push_back({{"id", p.id},
                     {"question", p.question},
                     {"answer", p.answer},
                     {"topic", p.topic},
                     {"suggestion", p.suggestion}});
    }
    *out_json = dup_string(out.dump());
  });
}

sg_status sg_serve_bind(sg_gateway* gw, const char* host, int port, int* bound_port) {
  return guarded(gw, [&] {
    auto& g = need(gw);
    if (gw->server) throw Error(ErrorCode::InvalidArgument, "server already bound");
    const auto& cfg = g.config();
    gw->server = std::make_unique<secgate::service::HttpServer>(
        g, secgate::service::auth_token_from_env(cfg));
    const int p = gw->server->bind(host ? host : cfg.host, port < 0 ? cfg.port : port);
    if (bound_port) *bound_port = p;
  });
}

sg_status sg_serve_run(sg_gateway* gw) {
  return guarded(gw, [&] {
    need(gw);
    if (!gw->server) throw Error(ErrorCode::InvalidArgument, "call sg_serve_bind first");
    gw->server->run();
  });
}

sg_status sg_serve_stop(sg_gateway* gw) {
  return guarded(gw, [&] {
    need(gw);
    if (gw->server) gw->server->stop();
  });
}

sg_status sg_vet_train(const char* request_json, char** out_json) {
  std::unique_lock job(g_vet_job, std::try_to_lock);
  if (!job.owns_lock()) return fail(SG_E_BUSY, "a training job is already running");
  return guarded(nullptr, [&] {
    namespace vet = secgate::vet;
    check_out(out_json);
    const auto req = parse_request(request_json);
    const auto corpus = read_file(req.at("corpus").get<std::string>());
    const auto heldout = read_file(req.at("heldout").get<std::string>());

    vet::Tokenizer base = req.contains("tokenizer")
                              ? vet::Tokenizer::load(req.at("tokenizer").get<std::string>())
                              : vet::train_bpe(non_empty_lines(corpus), req.value("base_vocab", 300));
    const auto tok = base.expand(expansion_forms(req));

    const auto init_seed = req.value("init_seed", std::uint64_t{1});
    vet::VetModel model;
    if (req.contains("checkpoint")) {
      model = vet::VetModel::load(req.at("checkpoint").get<std::string>());
    } else {
      vet::ModelDims dims;
      dims.vocab = base.vocab_size();
      dims.width = req.value("width", dims.width);
      dims.blocks = req.value("blocks", dims.blocks);
      dims.context = req.value("context", dims.context);
      model = vet::VetModel::init(dims, init_seed);
    }
    const auto vocab_before = model.dims().vocab;
    if (tok.vocab_size() != vocab_before) model = model.resized(tok.vocab_size(), init_seed + 1);

    vet::TrainConfig cfg;
    cfg.steps = req.value("steps", cfg.steps);
    cfg.learning_rate = req.value("learning_rate", cfg.learning_rate);
    cfg.batch_size = req.value("batch_size", cfg.batch_size);
    cfg.seed = req.value("seed", cfg.seed);
    const auto opt = secgate::text::to_lower_ascii(req.value("optimizer", std::string{"adam"}));
    if (opt == "sgd") {
      cfg.optimizer.kind = vet::OptimizerConfig::Kind::Sgd;
    } else if (opt != "adam") {
      throw Error(ErrorCode::InvalidArgument, "optimizer must be adam or sgd");
    }

    const auto report = vet::train(model, tok, corpus, heldout, cfg);
    if (req.contains("out")) model.save(req.at("out").get<std::string>());
    if (req.contains("tokenizer_out")) tok.save(req.at("tokenizer_out").get<std::string>());

    auto j = vet::to_json(report);
    j["vocab_before"] = vocab_before;
    j["vocab_after"] = model.dims().vocab;
    j["trainable_parameters"] = model.trainable_parameters();
    j["total_parameters"] = model.total_parameters();
    j["trainable_fraction"] = static_cast<double>(model.trainable_parameters()) /
                              static_cast<double>(model.total_parameters());
    *out_json = dup_string(j.dump());
  });
}

sg_status sg_vet_expand(const char* request_json, char** out_json) {
  return guarded(nullptr, [&] {
    namespace vet = secgate::vet;
    check_out(out_json);
    const auto req = parse_request(request_json);
    const auto base = vet::Tokenizer::load(req.at("tokenizer").get<std::string>());
    const auto tok = base.expand(expansion_forms(req));
    json added = json::array();
    for (auto id = base.vocab_size(); id < tok.vocab_size(); ++id) {
      added.push_back({{"id", id}, {"form", tok.bytes_of(static_cast<vet::TokenId>(id))}});
    }
    if (req.contains("out")) tok.save(req.at("out").get<std::string>());
    json j = {{"vocab_before", base.vocab_size()}, {"vocab_after", tok.vocab_size()}, {"added", added}};
    if (req.contains("checkpoint")) {
      const auto model = vet::VetModel::load(req.at("checkpoint").get<std::string>())
                             .resized(tok.vocab_size(), req.value("seed", std::uint64_t{1}));
      const auto path = req.value("checkpoint_out", req.at("checkpoint").get<std::string>());
      model.save(path);
      j["checkpoint"] = path;
    }
    *out_json = dup_string(j.dump());
  });
}

sg_status sg_vet_fraction(double vocab, double width, double total_params, double* out) {
  return guarded(nullptr, [&] {
    check_out(out);
    *out = secgate::vet::trainable_fraction(vocab, width, total_params);
  });
}

}  // extern "C"
