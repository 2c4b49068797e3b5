#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "stancepipe/corpus.hpp"
#include "stancepipe/timeutil.hpp"

namespace testing {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("stancepipe_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline stancepipe::Timestamp ts(const char* s) { return stancepipe::parse_timestamp(s); }

inline stancepipe::UserProfile user(std::string id, const char* created, std::uint64_t posts) {
  stancepipe::UserProfile u;
  u.user_id = std::move(id);
  u.screen_name = u.user_id;
  u.display_name = u.user_id;
  u.created_at = ts(created);
  u.post_count = posts;
  return u;
}

inline stancepipe::Tweet tweet(std::string id, std::string user_id, const char* created, std::string text) {
  stancepipe::Tweet t;
  t.tweet_id = std::move(id);
  t.user_id = std::move(user_id);
  t.created_at = ts(created);
  t.text = std::move(text);
  return t;
}

}  // namespace testing
