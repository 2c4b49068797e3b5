#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "stancepipe/corpus.hpp"

namespace stancepipe {

struct ActivityRate {
  std::string user_id;
  double normalized_volume = 0;  // posts per account-month
  std::int64_t account_age_months = 0;
};

struct IqrBounds {
  double q1 = 0;
  double q3 = 0;
  double upper = 0;
  double multiplier = 1.5;
};

enum class ScoreBackend { recorded_fixture, local_heuristic };

struct BotScore {
  std::string user_id;
  double score = 0;  // [0, 100]
  ScoreBackend backend = ScoreBackend::recorded_fixture;
};

enum class FilterStage { kept, outlier_removed, bot_removed };

struct FilterVerdict {
  std::string user_id;
  FilterStage stage = FilterStage::kept;
  std::optional<ActivityRate> rate;
  std::optional<BotScore> bot;
};

const char* to_string(ScoreBackend backend);
const char* to_string(FilterStage stage);

/// post_count / max(floor(age_days / 30), 1). Throws ValidationError when
/// the account was created after `reference_time`.
ActivityRate activity_rate(const UserProfile& user, Timestamp reference_time);

/// Percentile of sorted data, linear interpolation between order statistics
/// at rank p * (n - 1).
double percentile_sorted(std::span<const double> sorted, double p);

/// Tukey upper fence q3 + multiplier * (q3 - q1). Throws ValidationError on
/// empty input or a non-positive multiplier.
IqrBounds iqr_bounds(std::span<const double> values, double multiplier);

struct OutlierResult {
  IqrBounds bounds;
  std::vector<std::string> kept;          // input order
  std::vector<ActivityRate> kept_rates;   // parallel to kept
  std::vector<FilterVerdict> removed;     // input order
};

/// Removes users whose normalized volume is strictly above the fence
/// computed over every input user.
OutlierResult filter_outliers(std::span<const UserProfile> users, Timestamp reference_time, double multiplier);

class BotScorer {
 public:
  virtual ~BotScorer() = default;
  virtual BotScore score(const UserProfile& user, std::span<const Tweet> tweets) const = 0;
};

/// Language-independent local stand-in for a bot-detection service. Not a
/// reproduction of any published scorer. With tweets sorted by time:
///
///   regularity = max(0, 1 - cv(inter-post gaps))   (0.5 with a single tweet)
///   retweets   = retweeted / total
///   incomplete = missing of {image, location, display name} / 3
///   score      = 100 * (0.50 regularity + 0.35 retweets + 0.15 incomplete)
///
/// No tweets at all yields the uninformative 50. The profile schema carries
/// no follower counts, so no follower-based feature is used.
class HeuristicBotScorer final : public BotScorer {
 public:
  BotScore score(const UserProfile& user, std::span<const Tweet> tweets) const override;
};

enum class FixtureMissPolicy { error, fallback_heuristic };

/// Replays recorded scores from `{"user_id": ..., "score": ...}` lines.
class FixtureBotScorer final : public BotScorer {
 public:
  FixtureBotScorer(std::unordered_map<std::string, double> scores, FixtureMissPolicy policy);
  static FixtureBotScorer load(const std::filesystem::path& path, FixtureMissPolicy policy);

  BotScore score(const UserProfile& user, std::span<const Tweet> tweets) const override;
  std::size_t size() const { return scores_.size(); }

 private:
  std::unordered_map<std::string, double> scores_;
  FixtureMissPolicy policy_;
  HeuristicBotScorer fallback_;
};

BotScore score_bot(const UserProfile& user, std::span<const Tweet> tweets, const BotScorer& scorer);

struct BotFilterResult {
  std::vector<std::string> humans;
  std::vector<FilterVerdict> removed;
};

/// Bot iff score > threshold. Throws ValidationError naming every kept user
/// without a score.
BotFilterResult filter_bots(std::span<const std::string> kept_user_ids,
                            const std::unordered_map<std::string, BotScore>& scores, double threshold);

void write_verdicts_csv(std::ostream& out, std::span<const FilterVerdict> verdicts);

}  // namespace stancepipe
