#include "secgate/service/session_store.hpp"

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "secgate/core/error.hpp"

namespace secgate::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_all(int fd, const std::string& data, const fs::path& p) {
  std::size_t done = 0;
  while (done < data.size()) {
    const auto n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::Io, "write " + p.string() + ": " + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
}

}  // namespace

void atomic_write(const fs::path& path, const std::string& contents) {
  static std::atomic<unsigned long> counter{0};
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid()) + "." +
                       std::to_string(counter++);
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(ErrorCode::Io, "open " + tmp.string() + ": " + std::strerror(errno));
  try {
    write_all(fd, contents, tmp);
    if (::fsync(fd) != 0) throw Error(ErrorCode::Io, "fsync " + tmp.string() + ": " + std::strerror(errno));
  } catch (...) {
    ::close(fd);
    ::unlink(tmp.c_str());
    throw;
  }
  ::close(fd);
  if (::rename(tmp.c_str(), path.c_str()) != 0) {
    const std::string why = std::strerror(errno);
    ::unlink(tmp.c_str());
    throw Error(ErrorCode::Io, "rename to " + path.string() + ": " + why);
  }
}

std::shared_ptr<std::mutex> SessionStore::lock_for(const std::string& id) {
  std::lock_guard guard(registry_mutex_);
  auto& slot = locks_[id];
  if (!slot) slot = std::make_shared<std::mutex>();
  return slot;
}

bool SessionStore::valid_id(const std::string& id) {
  if (id.empty() || id.size() > 128) return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

FileSessionStore::FileSessionStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + root_.string() + ": " + ec.message());
  if (::access(root_.c_str(), W_OK) != 0) {
    throw Error(ErrorCode::Io, root_.string() + " is not writable");
  }
  // temp files left by writers that were killed mid-write
  for (const auto& entry : fs::directory_iterator(root_, ec)) {
    const auto name = entry.path().filename().string();
    const auto mark = name.find(".json.tmp.");
    if (mark == std::string::npos) continue;
    const auto pid_start = mark + 10;
    const auto pid_end = name.find('.', pid_start);
    const auto pid = std::atol(name.substr(pid_start, pid_end - pid_start).c_str());
    if (pid > 0 && pid != ::getpid() && ::kill(static_cast<pid_t>(pid), 0) != 0 && errno == ESRCH) {
      fs::remove(entry.path(), ec);
    }
  }
}

fs::path FileSessionStore::path_for(const std::string& id) const {
  if (!valid_id(id)) throw Error(ErrorCode::InvalidArgument, "invalid session id");
  return root_ / (id + ".json");
}

void FileSessionStore::persist(const quiz::QuizSession& s) {
  atomic_write(path_for(s.session_id), quiz::to_json(s).dump());
}

bool FileSessionStore::exists(const std::string& id) const {
  return valid_id(id) && fs::exists(path_for(id));
}

quiz::QuizSession FileSessionStore::load(const std::string& id) const {
  if (!valid_id(id)) throw Error(ErrorCode::NotFound, "no session '" + id + "'");
  const auto p = path_for(id);
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotFound, "no session '" + id + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw CorruptError(e.byte, "session " + id + " is not valid JSON");
  }
  try {
    auto s = quiz::session_from_json(j);
    if (s.session_id != id) throw CorruptError(0, "session id mismatch in " + p.string());
    return s;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw CorruptError(0, "session " + id + ": " + e.what());
  }
}

}  // namespace secgate::service
