#include "stancepipe/filtering.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "stancepipe/csv.hpp"
#include "stancepipe/errors.hpp"

namespace stancepipe {

const char* to_string(ScoreBackend backend) {
  return backend == ScoreBackend::recorded_fixture ? "recorded_fixture" : "local_heuristic";
}

const char* to_string(FilterStage stage) {
  switch (stage) {
    case FilterStage::kept: return "kept";
    case FilterStage::outlier_removed: return "outlier_removed";
    case FilterStage::bot_removed: return "bot_removed";
  }
  return "kept";
}

ActivityRate activity_rate(const UserProfile& user, Timestamp reference_time) {
  using namespace std::chrono;
  if (user.created_at > reference_time)
    throw ValidationError("user " + user.user_id + " created after the reference time");
  const auto age_days = floor<days>(reference_time - user.created_at).count();
  const std::int64_t months = age_days / 30;
  ActivityRate rate;
  rate.user_id = user.user_id;
  rate.account_age_months = months;
  rate.normalized_volume = static_cast<double>(user.post_count) / static_cast<double>(std::max<std::int64_t>(months, 1));
  return rate;
}

double percentile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ValidationError("percentile of empty data");
  const double rank = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

IqrBounds iqr_bounds(std::span<const double> values, double multiplier) {
  if (values.empty()) throw ValidationError("iqr_bounds needs at least one value");
  if (!(multiplier > 0)) throw ValidationError("iqr multiplier must be positive");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  IqrBounds b;
  b.multiplier = multiplier;
  b.q1 = percentile_sorted(sorted, 0.25);
  b.q3 = percentile_sorted(sorted, 0.75);
  b.upper = b.q3 + multiplier * (b.q3 - b.q1);
  return b;
}

OutlierResult filter_outliers(std::span<const UserProfile> users, Timestamp reference_time, double multiplier) {
  if (users.empty()) throw ValidationError("filter_outliers needs a non-empty catalog");
  std::vector<ActivityRate> rates;
  rates.reserve(users.size());
  std::vector<double> volumes;
  volumes.reserve(users.size());
  for (const auto& u : users) {
    rates.push_back(activity_rate(u, reference_time));
    volumes.push_back(rates.back().normalized_volume);
  }
  OutlierResult result;
  result.bounds = iqr_bounds(volumes, multiplier);
  for (auto& rate : rates) {
    if (rate.normalized_volume > result.bounds.upper) {
      FilterVerdict v;
      v.user_id = rate.user_id;
      v.stage = FilterStage::outlier_removed;
      v.rate = std::move(rate);
      result.removed.push_back(std::move(v));
    } else {
      result.kept.push_back(rate.user_id);
      result.kept_rates.push_back(std::move(rate));
    }
  }
  return result;
}

BotScore HeuristicBotScorer::score(const UserProfile& user, std::span<const Tweet> tweets) const {
  BotScore out{user.user_id, 50.0, ScoreBackend::local_heuristic};
  if (tweets.empty()) return out;

  std::vector<long long> times;
  times.reserve(tweets.size());
  std::size_t retweets = 0;
  for (const auto& t : tweets) {
    times.push_back(t.created_at.time_since_epoch().count());
    if (t.is_retweet) ++retweets;
  }
  std::sort(times.begin(), times.end());

  double regularity = 0.5;
  if (times.size() >= 2) {
    std::vector<double> gaps;
    for (std::size_t i = 1; i < times.size(); ++i) gaps.push_back(static_cast<double>(times[i] - times[i - 1]));
    const double mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) / static_cast<double>(gaps.size());
    double var = 0;
    for (double g : gaps) var += (g - mean) * (g - mean);
    var /= static_cast<double>(gaps.size());
    const double cv = mean > 0 ? std::sqrt(var) / mean : 0.0;
    regularity = std::max(0.0, 1.0 - cv);
  }
  const double retweet_ratio = static_cast<double>(retweets) / static_cast<double>(tweets.size());
  int missing = 0;
  if (!user.profile_image_ref || user.profile_image_ref->empty()) ++missing;
  if (!user.profile_location_text || user.profile_location_text->empty()) ++missing;
  if (user.display_name.empty()) ++missing;
  const double incomplete = missing / 3.0;

  out.score = std::clamp(100.0 * (0.50 * regularity + 0.35 * retweet_ratio + 0.15 * incomplete), 0.0, 100.0);
  return out;
}

FixtureBotScorer::FixtureBotScorer(std::unordered_map<std::string, double> scores, FixtureMissPolicy policy)
    : scores_(std::move(scores)), policy_(policy) {
  for (const auto& [id, s] : scores_)
    if (!(s >= 0 && s <= 100)) throw ValidationError("bot score for " + id + " outside [0, 100]");
}

FixtureBotScorer FixtureBotScorer::load(const std::filesystem::path& path, FixtureMissPolicy policy) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open bot-score fixture '" + path.string() + "'");
  std::unordered_map<std::string, double> scores;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("user_id") || !j.contains("score") ||
        !j["user_id"].is_string() || !j["score"].is_number())
      throw ParseError(path.string(), lineno, "expected {\"user_id\": string, \"score\": number}");
    scores[j["user_id"].get<std::string>()] = j["score"].get<double>();
  }
  return FixtureBotScorer(std::move(scores), policy);
}

BotScore FixtureBotScorer::score(const UserProfile& user, std::span<const Tweet> tweets) const {
  auto it = scores_.find(user.user_id);
  if (it != scores_.end()) return BotScore{user.user_id, it->second, ScoreBackend::recorded_fixture};
  if (policy_ == FixtureMissPolicy::fallback_heuristic) return fallback_.score(user, tweets);
  throw ValidationError("no recorded bot score for user " + user.user_id);
}

BotScore score_bot(const UserProfile& user, std::span<const Tweet> tweets, const BotScorer& scorer) {
  return scorer.score(user, tweets);
}

BotFilterResult filter_bots(std::span<const std::string> kept_user_ids,
                            const std::unordered_map<std::string, BotScore>& scores, double threshold) {
  std::vector<std::string> missing;
  for (const auto& id : kept_user_ids)
    if (!scores.count(id)) missing.push_back(id);
  if (!missing.empty()) {
    std::string msg = "missing bot score for:";
    for (const auto& id : missing) msg += " " + id;
    throw ValidationError(msg);
  }
  BotFilterResult result;
  for (const auto& id : kept_user_ids) {
    const auto& s = scores.at(id);
    if (s.score > threshold) {
      FilterVerdict v;
      v.user_id = id;
      v.stage = FilterStage::bot_removed;
      v.bot = s;
      result.removed.push_back(std::move(v));
    } else {
      result.humans.push_back(id);
    }
  }
  return result;
}

void write_verdicts_csv(std::ostream& out, std::span<const FilterVerdict> verdicts) {
  csv::write_row(out, {"user_id", "stage", "normalized_volume", "bot_score", "backend"});
  for (const auto& v : verdicts) {
    csv::write_row(out, {v.user_id, to_string(v.stage), v.rate ? csv::fixed(v.rate->normalized_volume, 6) : "",
                         v.bot ? csv::fixed(v.bot->score, 4) : "", v.bot ? to_string(v.bot->backend) : ""});
  }
}

}  // namespace stancepipe
