#pragma once

#include <openssl/evp.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace testsupport {

inline std::filesystem::path source_dir() { return SECGATE_SOURCE_DIR; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

inline std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("secgate-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
             std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Reference encoder, independent of the library's base64 implementation.
inline std::string oracle_base64(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

// Random valid UTF-8: ASCII, 2-, 3- and 4-byte code points (no surrogates).
inline std::string random_utf8(std::mt19937_64& rng, std::size_t max_cps) {
  std::uniform_int_distribution<std::size_t> len(0, max_cps);
  std::uniform_int_distribution<int> klass(0, 9);
  std::string s;
  const auto n = len(rng);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t cp;
    const int k = klass(rng);
    if (k < 5) {
      cp = std::uniform_int_distribution<std::uint32_t>(0x20, 0x7E)(rng);
      if (k == 0) cp = std::uniform_int_distribution<std::uint32_t>(0x00, 0x7F)(rng);
    } else if (k < 7) {
      cp = std::uniform_int_distribution<std::uint32_t>(0x80, 0x7FF)(rng);
    } else if (k < 9) {
      do {
        cp = std::uniform_int_distribution<std::uint32_t>(0x800, 0xFFFF)(rng);
      } while (cp >= 0xD800 && cp <= 0xDFFF);
    } else {
      cp = std::uniform_int_distribution<std::uint32_t>(0x10000, 0x10FFFF)(rng);
    }
    if (cp < 0x80) {
      s += static_cast<char>(cp);
    } else if (cp < 0x800) {
      s += static_cast<char>(0xC0 | (cp >> 6));
      s += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      s += static_cast<char>(0xE0 | (cp >> 12));
      s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      s += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      s += static_cast<char>(0xF0 | (cp >> 18));
      s += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      s += static_cast<char>(0x80 | (cp & 0x3F));
    }
  }
  return s;
}

// Minimal OpenAI-compatible chat completions endpoint on a free local port.
class StubChatServer {
 public:
  struct Recorded {
    std::string path;
    std::string authorization;
    nlohmann::json body;
  };

  // reply(body) returns (status, response body).
  using Handler = std::function<std::pair<int, std::string>(const nlohmann::json&)>;

  static std::string completion(const std::string& content) {
    return nlohmann::json{{"id", "chatcmpl-stub"},
                          {"object", "chat.completion"},
                          {"choices",
                           {{{"index", 0},
                             {"message", {{"role", "assistant"}, {"content", content}}},
                             {"finish_reason", "stop"}}}}}
        .dump();
  }

  explicit StubChatServer(Handler h) : handler_(std::move(h)) {
    auto route = [this](const httplib::Request& req, httplib::Response& res) {
      Recorded r;
      r.path = req.path;
      r.authorization = req.get_header_value("Authorization");
      try {
        r.body = nlohmann::json::parse(req.body);
      } catch (...) {
        r.body = nullptr;
      }
      std::pair<int, std::string> out;
      {
        std::lock_guard g(mu_);
        requests_.push_back(r);
        out = handler_(r.body);
      }
      res.status = out.first;
      res.set_content(out.second, "application/json");
    };
    server_.Post("/v1/chat/completions", route);
    server_.Post("/custom/chat/completions", route);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubChatServer() {
    server_.stop();
    thread_.join();
  }

  int port() const { return port_; }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  std::vector<Recorded> requests() const {
    std::lock_guard g(mu_);
    return requests_;
  }

 private:
  Handler handler_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mu_;
  std::vector<Recorded> requests_;
};

inline std::string five_scores(double e, double l, double t, double i, double s) {
  std::ostringstream o;
  o << "Ethics: " << e << "\nLegal Compliance: " << l << "\nTransparency: " << t
    << "\nIntent Analysis: " << i << "\nSocial Impact: " << s;
  return o.str();
}

// Sets an environment variable for the lifetime of the object.
class ScopedEnv {
 public:
  ScopedEnv(std::string name, const std::string& value) : name_(std::move(name)) {
    ::setenv(name_.c_str(), value.c_str(), 1);
  }
  ~ScopedEnv() { ::unsetenv(name_.c_str()); }

 private:
  std::string name_;
};

}  // namespace testsupport
