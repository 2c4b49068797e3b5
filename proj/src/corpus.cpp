#include "stancepipe/corpus.hpp"

#include <json.hpp>

#include <algorithm>

#include "stancepipe/errors.hpp"
#include "stancepipe/text.hpp"

namespace stancepipe {

using nlohmann::json;

namespace {

std::string fold_tag(std::string_view tag) {
  auto folded = casefold(trim(tag));
  if (!folded.empty() && folded.front() == '#') folded.erase(0, 1);
  return folded;
}

std::vector<std::string> fold_all(std::vector<std::string> in, bool strip_hash) {
  std::vector<std::string> out;
  for (auto& s : in) {
    auto f = strip_hash ? fold_tag(s) : casefold(trim(s));
    if (!f.empty()) out.push_back(std::move(f));
  }
  return out;
}

const json* field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) return nullptr;
  return &*it;
}

std::optional<json> parse_object(std::string_view line) {
  json j = json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  return j;
}

bool is_blank(std::string_view line) { return line.find_first_not_of(" \t\r\n") == std::string_view::npos; }

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

TopicConfig TopicConfig::make(std::vector<std::string> keywords, std::vector<std::string> hashtags,
                              std::vector<std::string> tracked_user_ids, Timestamp start, Timestamp end) {
  TopicConfig config;
  config.keywords = fold_all(std::move(keywords), false);
  config.hashtags = fold_all(std::move(hashtags), true);
  config.tracked_user_ids = std::move(tracked_user_ids);
  config.window_start = start;
  config.window_end = end;
  if (config.keywords.empty() && config.hashtags.empty() && config.tracked_user_ids.empty())
    throw ValidationError("topic config needs at least one keyword, hashtag or tracked user");
  if (!(start < end)) throw ValidationError("topic collection window start must precede end");
  return config;
}

bool UserCatalog::add(UserProfile user) {
  if (index_.count(user.user_id)) return false;
  index_.emplace(user.user_id, users_.size());
  users_.push_back(std::move(user));
  return true;
}

const UserProfile* UserCatalog::find(std::string_view user_id) const {
  auto it = index_.find(std::string(user_id));
  return it == index_.end() ? nullptr : &users_[it->second];
}

std::optional<UserProfile> parse_user_record(std::string_view line, std::optional<Timestamp> collection_end) {
  auto parsed = parse_object(line);
  if (!parsed) return std::nullopt;
  const json& j = *parsed;
  try {
    UserProfile u;
    u.user_id = j.at("id").get<std::string>();
    u.screen_name = j.value("screen_name", std::string{});
    u.display_name = j.value("name", std::string{});
    u.created_at = parse_timestamp(j.at("created_at").get<std::string>());
    if (const auto* loc = field(j, "location")) u.profile_location_text = loc->get<std::string>();
    if (const auto* img = field(j, "image_url")) u.profile_image_ref = img->get<std::string>();
    const auto& count = j.at("post_count");
    if (!count.is_number_integer() || count.get<long long>() < 0) return std::nullopt;
    u.post_count = count.get<std::uint64_t>();
    if (u.user_id.empty()) throw ValidationError("empty user id");
    if (collection_end && u.created_at > *collection_end)
      throw ValidationError("user " + u.user_id + " created after collection end");
    return u;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

std::optional<Tweet> parse_tweet_record(std::string_view line) {
  auto parsed = parse_object(line);
  if (!parsed) return std::nullopt;
  const json& j = *parsed;
  try {
    Tweet t;
    t.tweet_id = j.at("id").get<std::string>();
    t.user_id = j.at("user_id").get<std::string>();
    t.created_at = parse_timestamp(j.at("created_at").get<std::string>());
    t.text = j.at("text").get<std::string>();
    if (const auto* tags = field(j, "hashtags")) {
      for (const auto& tag : *tags) t.hashtags.push_back(fold_tag(tag.get<std::string>()));
    }
    const auto* lat = field(j, "lat");
    const auto* lon = field(j, "lon");
    if ((lat == nullptr) != (lon == nullptr)) throw ValidationError("lat/lon must appear together");
    if (lat) t.geo = GeoPoint{lat->get<double>(), lon->get<double>()};
    if (const auto* rt = field(j, "retweet")) t.is_retweet = rt->get<bool>();
    if (t.tweet_id.empty() || t.user_id.empty()) throw ValidationError("empty tweet or user id");
    if (t.geo && (t.geo->latitude < -90 || t.geo->latitude > 90 || t.geo->longitude < -180 ||
                  t.geo->longitude > 180))
      throw ValidationError("geotag out of range in tweet " + t.tweet_id);
    return t;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

std::string to_record(const UserProfile& user) {
  json j = {{"id", user.user_id},
            {"screen_name", user.screen_name},
            {"name", user.display_name},
            {"created_at", format_timestamp(user.created_at)},
            {"post_count", user.post_count}};
  if (user.profile_location_text) j["location"] = *user.profile_location_text;
  if (user.profile_image_ref) j["image_url"] = *user.profile_image_ref;
  return j.dump();
}

std::string to_record(const Tweet& tweet) {
  json j = {{"id", tweet.tweet_id},
            {"user_id", tweet.user_id},
            {"created_at", format_timestamp(tweet.created_at)},
            {"text", tweet.text},
            {"hashtags", tweet.hashtags},
            {"retweet", tweet.is_retweet}};
  if (tweet.geo) {
    j["lat"] = tweet.geo->latitude;
    j["lon"] = tweet.geo->longitude;
  }
  return j.dump();
}

UserLoad load_users(const std::filesystem::path& path, std::optional<Timestamp> collection_end) {
  auto in = open_or_throw(path);
  UserLoad result;
  std::string line;
  while (std::getline(in, line)) {
    if (is_blank(line)) continue;
    ++result.stats.lines;
    try {
      auto user = parse_user_record(line, collection_end);
      if (!user) {
        ++result.stats.malformed;
      } else if (!result.catalog.add(std::move(*user))) {
        ++result.stats.duplicates;
      } else {
        ++result.stats.accepted;
      }
    } catch (const ValidationError&) {
      ++result.stats.invalid;
    }
  }
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return result;
}

TweetReader::TweetReader(const std::filesystem::path& path, bool reject_duplicate_ids)
    : path_(path), in_(open_or_throw(path)), reject_duplicates_(reject_duplicate_ids) {}

std::optional<Tweet> TweetReader::next() {
  while (std::getline(in_, line_)) {
    if (is_blank(line_)) continue;
    ++stats_.lines;
    try {
      auto tweet = parse_tweet_record(line_);
      if (!tweet) {
        ++stats_.malformed;
        continue;
      }
      if (reject_duplicates_ && !seen_.insert(tweet->tweet_id).second) {
        ++stats_.duplicates;
        continue;
      }
      ++stats_.accepted;
      return tweet;
    } catch (const ValidationError&) {
      ++stats_.invalid;
    }
  }
  if (in_.bad()) throw IoError("read failure on '" + path_.string() + "'");
  return std::nullopt;
}

std::vector<Tweet> load_tweets(const std::filesystem::path& path, LoadStats* stats, bool reject_duplicate_ids) {
  TweetReader reader(path, reject_duplicate_ids);
  std::vector<Tweet> tweets;
  while (auto t = reader.next()) tweets.push_back(std::move(*t));
  if (stats) *stats = reader.stats();
  return tweets;
}

bool match_topic(const Tweet& tweet, const TopicConfig& config) {
  if (tweet.created_at < config.window_start || tweet.created_at > config.window_end) return false;
  for (const auto& tag : config.hashtags) {
    for (const auto& have : tweet.hashtags)
      if (casefold(have) == tag) return true;
  }
  if (!config.keywords.empty()) {
    const auto folded = casefold(tweet.text);
    for (const auto& kw : config.keywords)
      if (folded.find(kw) != std::string::npos) return true;
  }
  return std::find(config.tracked_user_ids.begin(), config.tracked_user_ids.end(), tweet.user_id) !=
         config.tracked_user_ids.end();
}

TokenizedText preprocess(std::string_view text, const StopWords& stopwords) {
  TokenizedText out;
  const auto folded = casefold(text);
  std::size_t pos = 0;
  while (pos < folded.size()) {
    const auto start = folded.find_first_not_of(" \t\r\n\f\v", pos);
    if (start == std::string::npos) break;
    auto end = folded.find_first_of(" \t\r\n\f\v", start);
    if (end == std::string::npos) end = folded.size();
    const std::string_view chunk(folded.data() + start, end - start);
    pos = end;
    if (starts_with(chunk, "http://") || starts_with(chunk, "https://") || starts_with(chunk, "www.")) continue;
    for (auto& run : word_runs(chunk)) {
      if (!stopwords.count(run)) out.tokens.push_back(std::move(run));
    }
  }
  return out;
}

StopWords load_stopwords(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  StopWords words;
  std::string line;
  while (std::getline(in, line)) {
    auto w = casefold(trim(line));
    if (!w.empty() && w.front() != '#') words.insert(std::move(w));
  }
  return words;
}

std::string join_tokens(const TokenizedText& text) {
  std::string out;
  for (const auto& t : text.tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace stancepipe
