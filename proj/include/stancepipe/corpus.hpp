#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "stancepipe/timeutil.hpp"

namespace stancepipe {

struct GeoPoint {
  double latitude = 0;
  double longitude = 0;
};

struct UserProfile {
  std::string user_id;
  std::string screen_name;
  std::string display_name;
  Timestamp created_at{};
  std::optional<std::string> profile_location_text;
  std::optional<std::string> profile_image_ref;
  std::uint64_t post_count = 0;
};

struct Tweet {
  std::string tweet_id;
  std::string user_id;
  Timestamp created_at{};
  std::string text;
  std::vector<std::string> hashtags;  // lowercase, no '#'
  std::optional<GeoPoint> geo;
  bool is_retweet = false;
};

struct TopicConfig {
  std::vector<std::string> keywords;
  std::vector<std::string> hashtags;
  std::vector<std::string> tracked_user_ids;
  Timestamp window_start{};
  Timestamp window_end{};

  /// Case-folds keywords/hashtags and strips leading '#'. Throws
  /// ValidationError when every list is empty or start >= end.
  static TopicConfig make(std::vector<std::string> keywords, std::vector<std::string> hashtags,
                          std::vector<std::string> tracked_user_ids, Timestamp start, Timestamp end);
};

struct TokenizedText {
  std::vector<std::string> tokens;
  bool operator==(const TokenizedText&) const = default;
};

using StopWords = std::unordered_set<std::string>;

/// Counts from one ingestion pass. Blank lines are ignored entirely and do
/// not count as records; every other line is either accepted or skipped.
struct LoadStats {
  std::size_t lines = 0;
  std::size_t accepted = 0;
  std::size_t malformed = 0;   // not a parseable record
  std::size_t invalid = 0;     // parseable but violates an invariant
  std::size_t duplicates = 0;  // id already seen

  std::size_t skipped() const { return malformed + invalid + duplicates; }
};

class UserCatalog {
 public:
  /// False (and nothing stored) when the id is already present.
  bool add(UserProfile user);
  const UserProfile* find(std::string_view user_id) const;
  const std::vector<UserProfile>& users() const { return users_; }
  std::size_t size() const { return users_.size(); }
  bool empty() const { return users_.empty(); }

 private:
  std::vector<UserProfile> users_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct UserLoad {
  UserCatalog catalog;
  LoadStats stats;
};

/// Parses one line of the user schema; nullopt if malformed. Invariant
/// violations (empty id, created_at after `collection_end`) throw
/// ValidationError.
std::optional<UserProfile> parse_user_record(std::string_view line,
                                             std::optional<Timestamp> collection_end = std::nullopt);
std::optional<Tweet> parse_tweet_record(std::string_view line);

std::string to_record(const UserProfile& user);
std::string to_record(const Tweet& tweet);

/// Loads a line-delimited user file. Later duplicates of an id are rejected
/// and counted. Throws IoError if the file cannot be read.
UserLoad load_users(const std::filesystem::path& path,
                    std::optional<Timestamp> collection_end = std::nullopt);

/// Single-pass tweet stream in file order. Holds one line at a time; id
/// tracking (and therefore memory proportional to the number of ids) is
/// only enabled with `reject_duplicate_ids`.
class TweetReader {
 public:
  explicit TweetReader(const std::filesystem::path& path, bool reject_duplicate_ids = false);

  std::optional<Tweet> next();
  const LoadStats& stats() const { return stats_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  bool reject_duplicates_;
  std::unordered_set<std::string> seen_;
  LoadStats stats_;
  std::string line_;
};

std::vector<Tweet> load_tweets(const std::filesystem::path& path, LoadStats* stats = nullptr,
                               bool reject_duplicate_ids = true);

/// Topic filter: (hashtag hit OR keyword substring of the case-folded text
/// OR tracked author) AND created_at within [start, end].
bool match_topic(const Tweet& tweet, const TopicConfig& config);

/// URLs dropped, then case-folded text split into letter/digit runs; '#'
/// and '@' prefixes fall away with the rest of the punctuation. Stop-words
/// are removed last.
TokenizedText preprocess(std::string_view text, const StopWords& stopwords);

StopWords load_stopwords(const std::filesystem::path& path);

std::string join_tokens(const TokenizedText& text);

}  // namespace stancepipe
