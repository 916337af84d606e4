#pragma once

// Shared fixtures for the test suites.

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "polaris/corpus.hpp"

namespace polaris::testing {

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("polaris_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::filesystem::path write_file(const std::filesystem::path& path,
                                        const std::string& content) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  out << content;
  return path;
}

inline Submission make_post(const std::string& id, const std::string& author,
                            std::int64_t created) {
  Submission s;
  s.id = id;
  s.kind = SubmissionKind::Post;
  s.thread_id = id;
  s.author_id = author;
  s.created_utc = created;
  s.body = "body " + id;
  return s;
}

inline Submission make_comment(const std::string& id, const std::string& author,
                               std::int64_t created, const std::string& thread,
                               const std::string& parent) {
  Submission s;
  s.id = id;
  s.kind = SubmissionKind::Comment;
  s.thread_id = thread;
  s.parent_id = parent;
  s.author_id = author;
  s.created_utc = created;
  s.body = "body " + id;
  return s;
}

}  // namespace polaris::testing
