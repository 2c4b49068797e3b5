#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "stancepipe/corpus.hpp"
#include "stancepipe/demographics.hpp"
#include "stancepipe/gazetteer.hpp"
#include "stancepipe/report.hpp"
#include "stancepipe/training.hpp"

namespace stancepipe {

/// (positive, negative, neutral) shares summing to 1.
using PolarityMix = std::array<double, 3>;

struct RegionSpec {
  std::string name;  // must be a region of the built-in gazetteer
  double weight = 1;
  std::optional<PolarityMix> mix;  // overrides the global mix
};

struct Lexicons {
  std::vector<std::string> positive;
  std::vector<std::string> negative;
  std::vector<std::string> neutral;
  std::vector<std::string> background;

  /// Letters-only pseudo-words, disjoint across classes.
  static Lexicons make_default(std::size_t per_class = 40, std::size_t background = 300);
};

struct SynthSpec {
  std::size_t n_users = 1000;
  double bot_fraction = 0.3;
  double outlier_fraction = 0.12;
  PolarityMix polarity_mix{0.35, 0.40, 0.25};
  Lexicons lexicons = Lexicons::make_default();
  std::size_t tweets_min = 6;
  std::size_t tweets_max = 14;
  double relevant_probability = 0.75;
  double own_class_probability = 0.85;  // share of a user's relevant tweets from their own lexicon
  double off_topic_probability = 0.05;  // tweets that the topic filter should drop
  double outlier_volume_factor = 10.0;
  double geotag_user_fraction = 0.3;
  double profile_location_fraction = 0.6;
  double image_fraction = 0.7;
  std::vector<RegionSpec> regions = default_regions();
  std::size_t labeled_positive = 500;
  std::size_t labeled_negative = 500;
  std::size_t labeled_neutral = 400;
  std::size_t labeled_non_relevant = 1000;
  std::size_t labeled_names_per_class = 300;
  Timestamp collection_end = parse_timestamp("2017-10-01T00:00:00Z");
  int collection_days = 92;
  std::uint64_t seed = 42;

  static std::vector<RegionSpec> default_regions();

  /// Throws ConfigError listing every violated constraint.
  void validate() const;
};

enum class TruthClass { positive, negative, neutral, non_relevant, off_topic };
const char* to_string(TruthClass c);

struct UserTruth {
  std::string user_id;
  bool is_bot = false;
  bool is_outlier = false;
  UserPolarity::Value polarity = UserPolarity::Value::neutral;
  Gender gender = Gender::unknown;
  int age = 0;
  std::string ethnicity;
  Place home;
};

struct TweetTruth {
  std::string tweet_id;
  std::string user_id;
  TruthClass truth = TruthClass::non_relevant;
};

struct FaceFixture {
  std::string image;
  int face_count = 0;
  Gender gender = Gender::unknown;
  int age = 0;
  double confidence = 0;
  bool transport_error = false;
};

struct SynthCorpus {
  std::vector<UserProfile> users;
  std::vector<Tweet> tweets;
  std::vector<UserTruth> user_truth;    // parallel to users
  std::vector<TweetTruth> tweet_truth;  // parallel to tweets
  std::vector<std::pair<std::string, double>> bot_scores;
  std::vector<FaceFixture> faces;
  std::vector<std::tuple<std::string, Gender, double>> name_genders;
  std::vector<LabeledName> labeled_names;
  std::vector<LabeledTweet> labeled_tweets;
  std::vector<GazetteerEntry> gazetteer;
  std::vector<OfficialResult> official;
  std::vector<std::string> stopwords;
  TopicConfig topic;
};

/// Deterministic for a given spec. Bots and outliers are disjoint sets of
/// exactly round(fraction * n_users) users each; bots get recorded scores
/// in [60, 100], everyone else [0, 30].
SynthCorpus generate(const SynthSpec& spec);

/// The gazetteer shipped with generated corpora.
std::vector<GazetteerEntry> builtin_gazetteer();

/// File names write_corpus uses inside its output directory.
struct CorpusFiles {
  static constexpr const char* users = "users.jsonl";
  static constexpr const char* tweets = "tweets.jsonl";
  static constexpr const char* bot_scores = "bot_scores.jsonl";
  static constexpr const char* faces = "faces.jsonl";
  static constexpr const char* name_gender = "name_gender.csv";
  static constexpr const char* labeled_names = "labeled_names.csv";
  static constexpr const char* labeled_tweets = "labeled_tweets.jsonl";
  static constexpr const char* gazetteer = "gazetteer.csv";
  static constexpr const char* official = "official.csv";
  static constexpr const char* stopwords = "stopwords.txt";
  static constexpr const char* truth_users = "truth_users.csv";
  static constexpr const char* truth_tweets = "truth_tweets.csv";
};

/// Writes every artifact of the corpus into `dir` (created if needed) and
/// returns the files written.
std::vector<std::filesystem::path> write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir);

void write_gazetteer_csv(std::ostream& out, const std::vector<GazetteerEntry>& entries);

/// Reads truth_users.csv back.
std::vector<UserTruth> load_user_truth(const std::filesystem::path& path);

}  // namespace stancepipe
