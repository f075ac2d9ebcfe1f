#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "secgate/quiz/quiz.hpp"

namespace secgate::service {

// Quiz session persistence with one writer per session at a time.
class SessionStore {
 public:
  virtual ~SessionStore() = default;

  // Throws InvalidArgument for ids that are not filesystem-safe tokens.
  virtual void persist(const quiz::QuizSession& s) = 0;
  // Throws NotFound, CorruptError.
  virtual quiz::QuizSession load(const std::string& id) const = 0;
  virtual bool exists(const std::string& id) const = 0;

  // Per-session lock; the same mutex is returned for the same id.
  std::shared_ptr<std::mutex> lock_for(const std::string& id);

  // load, mutate, persist under the session lock. f may throw, in which case
  // nothing is written.
  template <typename F>
  auto with_session(const std::string& id, F&& f) {
    const auto m = lock_for(id);
    std::lock_guard guard(*m);
    auto session = load(id);
    auto result = f(session);
    persist(session);
    return result;
  }

  // [A-Za-z0-9_-]{1,128}
  static bool valid_id(const std::string& id);

 private:
  std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<std::mutex>> locks_;
};

// One <id>.json file per session under root. Writes go to a temp file that
// is fsync'd and renamed over the target, so a reader sees either the old or
// the new document.
class FileSessionStore final : public SessionStore {
 public:
  // Creates root if needed and removes temp files of dead writers. Throws Io
  // when root is not writable.
  explicit FileSessionStore(std::filesystem::path root);

  void persist(const quiz::QuizSession& s) override;
  quiz::QuizSession load(const std::string& id) const override;
  bool exists(const std::string& id) const override;

  std::filesystem::path path_for(const std::string& id) const;

 private:
  std::filesystem::path root_;
};

// Writes `contents` to `path` via temp file, fsync and rename. Throws Io.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

}  // namespace secgate::service
