#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stancepipe/corpus.hpp"
#include "stancepipe/gazetteer.hpp"

namespace stancepipe {

enum class Gender { male, female, unknown };
enum class GenderSource { face_service, name_table, none };

struct GenderResult {
  Gender value = Gender::unknown;
  GenderSource source = GenderSource::none;
  double confidence = 0;
};

enum class AgeBucket { under18, b18_30, b31_45, b46_65, over65, unknown };

struct AgeResult {
  std::optional<int> years;
  AgeBucket bucket = AgeBucket::unknown;
};

struct EthnicityResult {
  std::string label;  // empty when no label could be assigned
  double confidence = 0;
  std::vector<std::string> path;
  std::optional<std::string> error;

  bool assigned() const { return !label.empty(); }
};

enum class LocationSource { geo_majority, profile_text, none };

/// Level at which a geotag vote was decided.
enum class VoteLevel { none, city, region, country, most_recent };

struct LocationResult {
  std::optional<std::string> country;
  std::optional<std::string> region;
  std::optional<std::string> city;
  LocationSource source = LocationSource::none;
  std::size_t supporting_count = 0;
  VoteLevel level = VoteLevel::none;
};

struct DemographicRecord {
  std::string user_id;
  GenderResult gender;
  AgeResult age;
  EthnicityResult ethnicity;
  LocationResult location;
};

const char* to_string(Gender g);
const char* to_string(GenderSource s);
const char* to_string(AgeBucket b);
const char* to_string(LocationSource s);
Gender parse_gender(std::string_view s);
AgeBucket parse_age_bucket(std::string_view s);
LocationSource parse_location_source(std::string_view s);

/// <18, 18-30, 31-45, 46-65, >65.
AgeBucket age_bucket(int years);

// Face analysis -------------------------------------------------------------

struct FaceObservation {
  int face_count = 0;
  std::optional<Gender> gender;
  std::optional<int> age;
  double confidence = 0;
};

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FaceClient {
 public:
  virtual ~FaceClient() = default;
  /// nullopt when the service has nothing for this image. Throws
  /// TransportError when the service could not be reached.
  virtual std::optional<FaceObservation> analyze(std::string_view image_ref) const = 0;
};

/// Replays recorded responses. Fixture lines:
///   {"image": "u7.jpg", "face_count": 1, "gender": "female", "age": 29, "confidence": 0.93}
///   {"image": "u8.jpg", "error": "timeout"}      -> TransportError on replay
class FixtureFaceClient final : public FaceClient {
 public:
  FixtureFaceClient() = default;
  explicit FixtureFaceClient(std::unordered_map<std::string, FaceObservation> responses,
                             std::unordered_map<std::string, std::string> failures = {});
  static FixtureFaceClient load(const std::filesystem::path& path);

  std::optional<FaceObservation> analyze(std::string_view image_ref) const override;

 private:
  std::unordered_map<std::string, FaceObservation> responses_;
  std::unordered_map<std::string, std::string> failures_;
};

/// First name -> (gender, confidence). CSV: first_name,gender,confidence.
class NameGenderTable {
 public:
  struct Entry {
    Gender gender = Gender::unknown;
    double confidence = 0;
  };

  NameGenderTable() = default;
  explicit NameGenderTable(std::unordered_map<std::string, Entry> entries);
  static NameGenderTable load(const std::filesystem::path& path);

  std::optional<Entry> lookup(std::string_view first_name) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, Entry> entries_;
};

/// Face result if exactly one face with a gender came back, else the
/// display name's first token in the name table, else unknown.
GenderResult extract_gender(const UserProfile& profile, const FaceClient& faces, const NameGenderTable& names);

/// Single-face responses only; there is no name-based age fallback.
AgeResult extract_age(const UserProfile& profile, const FaceClient& faces);

// Name ethnicity ------------------------------------------------------------

struct LabeledName {
  std::string name;
  std::string label;
};

/// Multinomial naive Bayes over padded character n-grams of case-folded
/// names, additive smoothing. Labels may be hierarchical with '>' between
/// levels ("European>Italian"); the path is the split label.
class NameEthnicityModel {
 public:
  NameEthnicityModel(int ngram_order, double smoothing, std::vector<std::string> labels,
                     std::vector<double> log_priors,
                     std::unordered_map<std::string, std::vector<double>> log_likelihoods);

  int ngram_order() const { return ngram_order_; }
  double smoothing() const { return smoothing_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<double>& log_priors() const { return log_priors_; }
  const std::unordered_map<std::string, std::vector<double>>& log_likelihoods() const { return log_likelihoods_; }

  /// Normalized posterior per label (same order as labels()). N-grams never
  /// seen in training carry no evidence and are skipped. Throws
  /// ValidationError for an empty name.
  std::vector<double> posterior(std::string_view name) const;

 private:
  int ngram_order_;
  double smoothing_;
  std::vector<std::string> labels_;  // sorted
  std::vector<double> log_priors_;
  std::unordered_map<std::string, std::vector<double>> log_likelihoods_;
};

/// Boundary-padded n-grams of the case-folded name, in order.
std::vector<std::string> char_ngrams(std::string_view name, int order);

NameEthnicityModel train_name_classifier(std::span<const LabeledName> examples, int ngram_order = 3,
                                         double smoothing = 1.0);

/// Argmax posterior; ties go to the lexicographically smallest label. An
/// empty name yields an unassigned result with `error` set.
EthnicityResult classify_ethnicity(std::string_view name, const NameEthnicityModel& model);

std::vector<LabeledName> load_labeled_names(const std::filesystem::path& path);

// Location ------------------------------------------------------------------

/// Geotag majority vote at city level, escalating to region then country
/// on ties, then falling back to the most recent voting tweet. Without any
/// usable geotag, the profile location text is looked up instead.
LocationResult resolve_location(const UserProfile& user, std::span<const Tweet> user_tweets,
                                const Gazetteer& gazetteer, double radius_km = 50.0);

LocationResult make_location(const Place& place, LocationSource source, std::size_t support, VoteLevel level);

// Per-user extraction -------------------------------------------------------

struct DemographicSources {
  const FaceClient& faces;
  const NameGenderTable& names;
  const NameEthnicityModel* ethnicity = nullptr;  // optional
  const Gazetteer& gazetteer;
  double radius_km = 50.0;
};

DemographicRecord extract_demographics(const UserProfile& user, std::span<const Tweet> user_tweets,
                                       const DemographicSources& sources);

void write_demographics_csv(std::ostream& out, std::span<const DemographicRecord> records);
std::vector<DemographicRecord> read_demographics_csv(const std::filesystem::path& path);

}  // namespace stancepipe
