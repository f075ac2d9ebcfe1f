// Command-line front end. Talks to the library through the C API only.
#include <pthread.h>
#include <signal.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "secgate/secgate.h"

using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;

struct Failure {
  sg_status status;
};

struct GatewayHandle {
  sg_gateway* gw = nullptr;
  ~GatewayHandle() { sg_gateway_close(gw); }
};

void check(sg_status s) {
  if (s != SG_OK) {
    std::cerr << "error (" << sg_status_name(s) << "): " << sg_last_error() << '\n';
    throw Failure{s};
  }
}

std::string take(char* s) {
  std::string out(s ? s : "");
  sg_string_free(s);
  return out;
}

void open_gateway(GatewayHandle& h, const std::string& config) {
  check(sg_gateway_open(config.c_str(), &h.gw));
}

std::string default_config() {
  const char* env = std::getenv("SECGATE_CONFIG");
  return env && *env ? env : "config/mock.json";
}

int cmd_serve(const std::string& config, const std::optional<std::string>& host,
              std::optional<int> port) {
  // SIGINT/SIGTERM are taken synchronously by a watcher thread so shutdown
  // goes through the normal stop path.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  GatewayHandle h;
  open_gateway(h, config);
  int bound = 0;
  check(sg_serve_bind(h.gw, host ? host->c_str() : nullptr, port.value_or(-1), &bound));
  std::cout << "secgate " << sg_version() << " listening on port " << bound << std::endl;

  sg_gateway* gw = h.gw;
  std::thread([set, gw] {
    int sig = 0;
    sigwait(&set, &sig);
    sg_serve_stop(gw);
  }).detach();
  check(sg_serve_run(h.gw));
  std::cout << "stopped" << std::endl;
  return kOk;
}

int cmd_evaluate(const std::string& config, const std::string& text,
                 const std::optional<std::string>& image_ref) {
  GatewayHandle h;
  open_gateway(h, config);
  json req = {{"text", text}};
  if (image_ref) req["image_ref"] = *image_ref;
  char* out = nullptr;
  check(sg_evaluate(h.gw, req.dump().c_str(), &out));
  std::cout << json::parse(take(out)).dump(2) << '\n';
  return kOk;
}

int cmd_quiz_run(const std::string& config, std::optional<std::size_t> n,
                 std::optional<std::size_t> k, std::optional<std::uint64_t> seed,
                 const std::string& topic) {
  GatewayHandle h;
  open_gateway(h, config);
  json req = json::object();
  if (n) req["n"] = *n;
  if (k) req["k"] = *k;
  if (seed) req["seed"] = *seed;
  if (!topic.empty()) req["topic"] = topic;
  char* out = nullptr;
  check(sg_quiz_create(h.gw, req.dump().c_str(), &out));
  const auto session = json::parse(take(out));
  const auto id = session.at("session_id").get<std::string>();
  std::cout << "Quiz " << id << " (" << session["items"].size() << " questions)\n";

  for (const auto& item : session["items"]) {
    const auto& options = item["options"];
    std::cout << "\n[" << item["index"].get<std::size_t>() + 1 << "] "
              << item["question"].get<std::string>() << '\n';
    for (std::size_t i = 0; i < options.size(); ++i) {
      std::cout << "  " << i + 1 << ") " << options[i].get<std::string>() << '\n';
    }
    std::size_t choice = 0;
    std::string line;
    while (true) {
      std::cout << "answer> " << std::flush;
      if (!std::getline(std::cin, line)) {
        std::cout << "\n";
        goto report;
      }
      try {
        choice = std::stoul(line);
      } catch (const std::exception&) {
        choice = 0;
      }
      if (choice >= 1 && choice <= options.size()) break;
      std::cout << "enter a number between 1 and " << options.size() << '\n';
    }
    {
      const json answer = {{"index", item["index"]}, {"choice", choice - 1}};
      check(sg_quiz_answer(h.gw, id.c_str(), answer.dump().c_str(), &out));
      const auto result = json::parse(take(out));
      if (result["correct"].get<bool>()) {
        std::cout << "correct\n";
      } else {
        std::cout << "wrong; the answer is: "
                  << options[result["correct_index"].get<std::size_t>()].get<std::string>() << '\n';
        if (result["suggestion"].is_string() && !result["suggestion"].get<std::string>().empty()) {
          std::cout << "suggestion: " << result["suggestion"].get<std::string>() << '\n';
        }
      }
    }
  }

report:
  check(sg_quiz_report(h.gw, id.c_str(), &out));
  const auto report = json::parse(take(out));
  std::cout << "\nscore: " << report["correct"] << "/" << report["answered"] << '\n';
  for (const auto& [topic_name, t] : report["by_topic"].items()) {
    std::cout << "  " << (topic_name.empty() ? "(no topic)" : topic_name) << ": " << t["correct"]
              << "/" << t["answered"] << '\n';
  }
  for (const auto& w : report["wrong"]) {
    std::cout << "review: " << w["question"].get<std::string>() << "\n  correct answer: "
              << w["correct"].get<std::string>() << '\n';
  }
  return kOk;
}

json load_payload_file(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) return json::parse(line);
  }
  throw std::runtime_error("payload file " + path + " is empty");
}

int cmd_simulate(const std::string& config, const std::string& payload,
                 const std::string& strategy, const std::string& persona, std::size_t parts,
                 const std::string& target) {
  GatewayHandle h;
  open_gateway(h, config);
  json req = json::object();
  if (std::filesystem::is_regular_file(payload)) {
    req["payload"] = load_payload_file(payload);
  } else {
    req["payload_id"] = payload;
  }
  json strat = {{"name", strategy}};
  if (!persona.empty()) strat["persona"] = persona;
  if (parts) strat["parts"] = parts;
  req["strategy"] = strat;
  if (!target.empty()) req["target"] = target;
  char* out = nullptr;
  check(sg_simulate(h.gw, req.dump().c_str(), &out));
  std::cout << json::parse(take(out)).dump(2) << '\n';
  return kOk;
}

int cmd_corpus_build(const std::string& config, const std::string& topic, std::size_t n,
                     const std::string& backend, const std::string& out_path) {
  GatewayHandle h;
  open_gateway(h, config);
  const json req = {{"topic", topic}, {"n", n}, {"backend", backend}};
  char* out = nullptr;
  check(sg_corpus_build(h.gw, req.dump().c_str(), &out));
  const auto pairs = json::parse(take(out));
  std::ostringstream lines;
  for (const auto& p : pairs) lines << p.dump() << '\n';
  if (out_path.empty() || out_path == "-") {
    std::cout << lines.str();
  } else {
    std::ofstream f(out_path, std::ios::binary);
    f << lines.str();
    if (!f) throw std::runtime_error("cannot write " + out_path);
    std::cerr << "wrote " << pairs.size() << " pairs to " << out_path << '\n';
  }
  return kOk;
}

int run_json_command(sg_status (*fn)(const char*, char**), const json& req) {
  char* out = nullptr;
  check(fn(req.dump().c_str(), &out));
  std::cout << json::parse(take(out)).dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"secgate: input gate, security quiz, attack simulator and VET tooling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sg_version()));
  std::string config = default_config();
  app.add_option("-c,--config", config, "service config file (JSON)");

  int rc = kOk;
  std::function<int()> action;

  auto* serve = app.add_subcommand("serve", "run the HTTP API");
  std::optional<std::string> host;
  std::optional<int> port;
  serve->add_option("--host", host, "override the configured listen host");
  serve->add_option("--port", port, "override the configured port (0 = any)");
  serve->callback([&] { action = [&] { return cmd_serve(config, host, port); }; });

  auto* evaluate = app.add_subcommand("evaluate", "score text against the gate policy");
  std::string text;
  std::optional<std::string> image_ref;
  evaluate->add_option("text", text, "input text")->required();
  evaluate->add_option("--image-ref", image_ref, "image reference forwarded to the evaluator");
  evaluate->callback([&] { action = [&] { return cmd_evaluate(config, text, image_ref); }; });

  auto* quiz = app.add_subcommand("quiz", "security knowledge quiz");
  quiz->require_subcommand(1);
  auto* quiz_run = quiz->add_subcommand("run", "take a quiz in the terminal");
  std::optional<std::size_t> qn, qk;
  std::optional<std::uint64_t> qseed;
  std::string qtopic;
  quiz_run->add_option("-n", qn, "number of questions");
  quiz_run->add_option("-k", qk, "options per question");
  quiz_run->add_option("--seed", qseed, "session seed");
  quiz_run->add_option("--topic", qtopic, "restrict to one topic");
  quiz_run->callback([&] { action = [&] { return cmd_quiz_run(config, qn, qk, qseed, qtopic); }; });

  auto* simulate = app.add_subcommand("simulate", "fire one payload at a target profile");
  std::string payload, strategy = "identity", persona, target;
  std::size_t parts = 0;
  simulate->add_option("--payload", payload, "bundled payload id or a JSON payload file")->required();
  simulate->add_option("--strategy", strategy, "identity | base64 | roleplay | split");
  simulate->add_option("--persona", persona, "persona for roleplay");
  simulate->add_option("--parts", parts, "part count for split");
  simulate->add_option("--target", target, "target profile name");
  simulate->callback([&] {
    action = [&] { return cmd_simulate(config, payload, strategy, persona, parts, target); };
  });

  auto* vet = app.add_subcommand("vet", "vocabulary expansion training");
  vet->require_subcommand(1);

  auto* vet_train = vet->add_subcommand("train", "expand the vocabulary and train embed/project");
  std::string corpus, heldout, tokenizer, expansion_file, out, tokenizer_out, checkpoint;
  std::vector<std::string> forms;
  std::size_t steps = 500, batch = 4, width = 64, blocks = 2, context = 64, base_vocab = 300;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  std::string optimizer = "adam";
  vet_train->add_option("--corpus", corpus, "training text")->required();
  vet_train->add_option("--heldout", heldout, "held-out text")->required();
  vet_train->add_option("--tokenizer", tokenizer, "base tokenizer JSON (default: BPE on corpus)");
  vet_train->add_option("--base-vocab", base_vocab, "BPE vocabulary when training a tokenizer");
  vet_train->add_option("--checkpoint", checkpoint, "base model checkpoint");
  vet_train->add_option("--expand", forms, "expansion form (repeatable)");
  vet_train->add_option("--expansion-file", expansion_file, "one expansion form per line");
  vet_train->add_option("--steps", steps);
  vet_train->add_option("--lr", lr);
  vet_train->add_option("--batch", batch);
  vet_train->add_option("--seed", seed);
  vet_train->add_option("--optimizer", optimizer, "adam | sgd");
  vet_train->add_option("--width", width);
  vet_train->add_option("--blocks", blocks);
  vet_train->add_option("--context", context);
  vet_train->add_option("--out", out, "write the trained checkpoint here");
  vet_train->add_option("--tokenizer-out", tokenizer_out, "write the expanded tokenizer here");
  vet_train->callback([&] {
    action = [&] {
      json req = {{"corpus", corpus}, {"heldout", heldout}, {"steps", steps},
                  {"learning_rate", lr}, {"batch_size", batch}, {"seed", seed},
                  {"optimizer", optimizer}, {"width", width}, {"blocks", blocks},
                  {"context", context}, {"base_vocab", base_vocab}, {"expansion", forms}};
      if (!tokenizer.empty()) req["tokenizer"] = tokenizer;
      if (!checkpoint.empty()) req["checkpoint"] = checkpoint;
      if (!expansion_file.empty()) req["expansion_file"] = expansion_file;
      if (!out.empty()) req["out"] = out;
      if (!tokenizer_out.empty()) req["tokenizer_out"] = tokenizer_out;
      return run_json_command(sg_vet_train, req);
    };
  });

  auto* vet_expand = vet->add_subcommand("expand", "append expansion forms to a tokenizer");
  std::string expand_out, checkpoint_out;
  vet_expand->add_option("--tokenizer", tokenizer, "tokenizer JSON")->required();
  vet_expand->add_option("--expand", forms, "expansion form (repeatable)");
  vet_expand->add_option("--expansion-file", expansion_file, "one expansion form per line");
  vet_expand->add_option("--out", expand_out, "write the expanded tokenizer here");
  vet_expand->add_option("--checkpoint", checkpoint, "also resize this checkpoint");
  vet_expand->add_option("--checkpoint-out", checkpoint_out, "resized checkpoint path");
  vet_expand->callback([&] {
    action = [&] {
      json req = {{"tokenizer", tokenizer}, {"expansion", forms}};
      if (!expansion_file.empty()) req["expansion_file"] = expansion_file;
      if (!expand_out.empty()) req["out"] = expand_out;
      if (!checkpoint.empty()) req["checkpoint"] = checkpoint;
      if (!checkpoint_out.empty()) req["checkpoint_out"] = checkpoint_out;
      return run_json_command(sg_vet_expand, req);
    };
  });

  auto* vet_report = vet->add_subcommand("report", "share of parameters VET trains");
  double vocab = 0, dim = 0, total = 0;
  vet_report->add_option("--vocab", vocab, "vocabulary size V")->required();
  vet_report->add_option("--dim", dim, "model width d")->required();
  vet_report->add_option("--total", total, "total parameter count")->required();
  vet_report->callback([&] {
    action = [&] {
      double fraction = 0;
      check(sg_vet_fraction(vocab, dim, total, &fraction));
      std::printf("%.2f%%\n", fraction * 100.0);
      return kOk;
    };
  });

  auto* corpus_cmd = app.add_subcommand("corpus", "Q&A corpus tooling");
  corpus_cmd->require_subcommand(1);
  auto* corpus_build = corpus_cmd->add_subcommand("build", "generate Q&A pairs with a backend");
  std::string topic, backend = "default", corpus_out;
  std::size_t count = 10;
  corpus_build->add_option("--topic", topic, "topic to ask about")->required();
  corpus_build->add_option("-n,--count", count, "pairs to request");
  corpus_build->add_option("--backend", backend, "configured backend name");
  corpus_build->add_option("-o,--out", corpus_out, "JSON-lines output (default stdout)");
  corpus_build->callback([&] {
    action = [&] { return cmd_corpus_build(config, topic, count, backend, corpus_out); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    if (e.get_exit_code() != 0) std::cerr << app.help();
    return kUsage;
  }

  try {
    rc = action ? action() : kUsage;
  } catch (const Failure&) {
    rc = kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    rc = kRuntime;
  }
  return rc;
}
