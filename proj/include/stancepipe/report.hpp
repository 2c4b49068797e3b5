#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stancepipe/demographics.hpp"
#include "stancepipe/polarity.hpp"
#include "stancepipe/training.hpp"

namespace stancepipe {

struct PolarityDistribution {
  std::size_t n_positive = 0;
  std::size_t n_negative = 0;
  std::size_t n_neutral = 0;
  std::size_t n_polarized = 0;
  std::size_t n_analyzed = 0;

  bool operator==(const PolarityDistribution&) const = default;
};

PolarityDistribution polarity_distribution(std::span<const UserPolarity::Value> users);

enum class BreakdownDimension { gender, age_bucket, ethnicity, region, city, country };
const char* to_string(BreakdownDimension d);

struct BreakdownRow {
  std::string category;
  std::size_t n_positive = 0;
  std::size_t n_negative = 0;
  std::size_t n_neutral = 0;

  std::size_t total() const { return n_positive + n_negative + n_neutral; }
};

struct DemographicBreakdown {
  BreakdownDimension dimension = BreakdownDimension::gender;
  std::vector<BreakdownRow> rows;  // descending by total; "Others" last when present
  std::size_t excluded = 0;        // polarized users whose value is unknown
};

/// A user's final polarity joined with what demographics found for them.
struct AnnotatedUser {
  std::string user_id;
  UserPolarity::Value polarity = UserPolarity::Value::unassigned;
  DemographicRecord demographics;
};

inline constexpr const char* kOthersCategory = "Others";

/// Demographic value of a user for a dimension; nullopt when unknown.
std::optional<std::string> category_of(const DemographicRecord& record, BreakdownDimension dimension);

/// Polarized users grouped by demographic value, unknown values counted in
/// `excluded`; the top_k largest groups (ties by name) are kept and the rest
/// summed into "Others". Unassigned users are ignored.
DemographicBreakdown breakdown(std::span<const AnnotatedUser> users, BreakdownDimension dimension,
                               std::size_t top_k);

/// 100 * positive / (positive + negative); nullopt with no positive or
/// negative users. Neutral and unassigned users do not count.
std::optional<double> predicted_yes_share(std::span<const UserPolarity::Value> users);

struct YesShareRow {
  std::string location;
  std::size_t n_positive = 0;
  std::size_t n_negative = 0;
  double yes_pct = 0;
};

/// One row per location at the given level (region, city or country),
/// sorted by location name. Locations without positive or negative users
/// are omitted with a warning.
std::vector<YesShareRow> yes_shares_by_location(std::span<const AnnotatedUser> users, BreakdownDimension level);

struct OfficialResult {
  std::string location;
  double official_yes_pct = 0;
  double turnout_pct = 0;
};

/// CSV location,official_yes_pct,turnout_pct (header optional). Throws
/// ParseError naming the line of the first malformed row.
std::vector<OfficialResult> load_official_results(const std::filesystem::path& path);

struct OfficialComparison {
  std::string location;
  double predicted_yes_pct = 0;
  double official_yes_pct = 0;
  double turnout_pct = 0;
};

struct ComparisonResult {
  std::vector<OfficialComparison> matched;        // predicted order
  std::vector<std::string> predicted_unmatched;   // predicted locations with no official row
  std::vector<std::string> official_unmatched;    // official locations with no prediction
};

/// Joins on fold_key(location).
ComparisonResult compare_official(std::span<const YesShareRow> predicted, std::span<const OfficialResult> official);

struct FilteringCounts {
  std::size_t collected = 0;
  std::size_t after_outliers = 0;
  std::size_t after_bots = 0;
};

struct ReportBundle {
  FilteringCounts filtering;
  std::vector<PredictorReport> predictors;
  PolarityDistribution distribution;
  std::vector<DemographicBreakdown> breakdowns;
  std::vector<std::pair<BreakdownDimension, std::vector<YesShareRow>>> yes_shares;
  ComparisonResult comparison;
};

enum class ReportFormat { csv, structured_text };

std::string distribution_csv(const PolarityDistribution& d);
std::string breakdown_csv(const DemographicBreakdown& b);
std::string yes_share_csv(std::span<const YesShareRow> rows);
std::string comparison_csv(const ComparisonResult& c);
std::string filtering_csv(const FilteringCounts& f);
std::string render_text(const ReportBundle& bundle);

/// Writes the bundle into `dir` and returns the files written, sorted.
/// csv: one file per table; structured_text: a single report.txt.
std::vector<std::filesystem::path> emit(const ReportBundle& bundle, const std::filesystem::path& dir,
                                        ReportFormat format);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace stancepipe
