#include "stancepipe/demographics.hpp"

#include <json.hpp>
#include <unicode/utf8.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "stancepipe/csv.hpp"
#include "stancepipe/errors.hpp"
#include "stancepipe/log.hpp"
#include "stancepipe/text.hpp"

namespace stancepipe {

const char* to_string(Gender g) {
  switch (g) {
    case Gender::male: return "male";
    case Gender::female: return "female";
    case Gender::unknown: return "unknown";
  }
  return "unknown";
}

const char* to_string(GenderSource s) {
  switch (s) {
    case GenderSource::face_service: return "face_service";
    case GenderSource::name_table: return "name_table";
    case GenderSource::none: return "none";
  }
  return "none";
}

const char* to_string(AgeBucket b) {
  switch (b) {
    case AgeBucket::under18: return "under18";
    case AgeBucket::b18_30: return "18-30";
    case AgeBucket::b31_45: return "31-45";
    case AgeBucket::b46_65: return "46-65";
    case AgeBucket::over65: return "over65";
    case AgeBucket::unknown: return "unknown";
  }
  return "unknown";
}

const char* to_string(LocationSource s) {
  switch (s) {
    case LocationSource::geo_majority: return "geo_majority";
    case LocationSource::profile_text: return "profile_text";
    case LocationSource::none: return "none";
  }
  return "none";
}

Gender parse_gender(std::string_view s) {
  const auto f = casefold(trim(s));
  if (f == "male" || f == "m") return Gender::male;
  if (f == "female" || f == "f") return Gender::female;
  return Gender::unknown;
}

AgeBucket parse_age_bucket(std::string_view s) {
  for (auto b : {AgeBucket::under18, AgeBucket::b18_30, AgeBucket::b31_45, AgeBucket::b46_65, AgeBucket::over65})
    if (s == to_string(b)) return b;
  return AgeBucket::unknown;
}

LocationSource parse_location_source(std::string_view s) {
  if (s == "geo_majority") return LocationSource::geo_majority;
  if (s == "profile_text") return LocationSource::profile_text;
  return LocationSource::none;
}

AgeBucket age_bucket(int years) {
  if (years < 18) return AgeBucket::under18;
  if (years <= 30) return AgeBucket::b18_30;
  if (years <= 45) return AgeBucket::b31_45;
  if (years <= 65) return AgeBucket::b46_65;
  return AgeBucket::over65;
}

// Face fixtures -------------------------------------------------------------

FixtureFaceClient::FixtureFaceClient(std::unordered_map<std::string, FaceObservation> responses,
                                     std::unordered_map<std::string, std::string> failures)
    : responses_(std::move(responses)), failures_(std::move(failures)) {}

FixtureFaceClient FixtureFaceClient::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open face fixture '" + path.string() + "'");
  std::unordered_map<std::string, FaceObservation> responses;
  std::unordered_map<std::string, std::string> failures;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("image") || !j["image"].is_string())
      throw ParseError(path.string(), lineno, "face fixture record needs an \"image\" key");
    const auto image = j["image"].get<std::string>();
    try {
      if (j.contains("error")) {
        failures[image] = j["error"].get<std::string>();
        continue;
      }
      FaceObservation obs;
      obs.face_count = j.value("face_count", 0);
      if (j.contains("gender") && !j["gender"].is_null()) {
        const auto g = parse_gender(j["gender"].get<std::string>());
        if (g != Gender::unknown) obs.gender = g;
      }
      if (j.contains("age") && !j["age"].is_null()) obs.age = j["age"].get<int>();
      obs.confidence = j.value("confidence", 0.0);
      if (obs.face_count < 0 || obs.confidence < 0 || obs.confidence > 1 || (obs.age && *obs.age < 0))
        throw ParseError(path.string(), lineno, "face fixture value out of range");
      responses[image] = obs;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string(), lineno, e.what());
    }
  }
  return FixtureFaceClient(std::move(responses), std::move(failures));
}

std::optional<FaceObservation> FixtureFaceClient::analyze(std::string_view image_ref) const {
  const std::string key(image_ref);
  if (auto f = failures_.find(key); f != failures_.end()) throw TransportError(f->second);
  auto it = responses_.find(key);
  if (it == responses_.end()) return std::nullopt;
  return it->second;
}

// Name table ----------------------------------------------------------------

NameGenderTable::NameGenderTable(std::unordered_map<std::string, Entry> entries) {
  for (auto& [name, entry] : entries) entries_[casefold(trim(name))] = entry;
}

NameGenderTable NameGenderTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open name-gender table '" + path.string() + "'");
  std::unordered_map<std::string, Entry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = csv::parse_line(line);
    if (!fields || fields->size() != 3) throw ParseError(path.string(), lineno, "expected first_name,gender,confidence");
    const auto& f = *fields;
    if (lineno == 1 && f[0] == "first_name") continue;
    Entry e;
    e.gender = parse_gender(f[1]);
    try {
      e.confidence = std::stod(f[2]);
    } catch (const std::exception&) {
      throw ParseError(path.string(), lineno, "bad confidence");
    }
    if (e.gender == Gender::unknown || e.confidence < 0 || e.confidence > 1)
      throw ParseError(path.string(), lineno, "gender must be male/female and confidence in [0,1]");
    entries[f[0]] = e;
  }
  return NameGenderTable(std::move(entries));
}

std::optional<NameGenderTable::Entry> NameGenderTable::lookup(std::string_view first_name) const {
  auto it = entries_.find(casefold(trim(first_name)));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

namespace {

std::optional<FaceObservation> single_face(const UserProfile& profile, const FaceClient& faces) {
  if (!profile.profile_image_ref || profile.profile_image_ref->empty()) return std::nullopt;
  try {
    auto obs = faces.analyze(*profile.profile_image_ref);
    if (obs && obs->face_count == 1) return obs;
  } catch (const TransportError& e) {
    log::warn("face service failed for " + profile.user_id + ": " + e.what());
  }
  return std::nullopt;
}

std::string first_token(std::string_view display_name) {
  auto runs = word_runs(casefold(display_name));
  return runs.empty() ? std::string() : runs.front();
}

}  // namespace

GenderResult extract_gender(const UserProfile& profile, const FaceClient& faces, const NameGenderTable& names) {
  if (auto face = single_face(profile, faces); face && face->gender)
    return GenderResult{*face->gender, GenderSource::face_service, face->confidence};
  const auto first = first_token(profile.display_name);
  if (!first.empty()) {
    if (auto hit = names.lookup(first); hit && hit->gender != Gender::unknown)
      return GenderResult{hit->gender, GenderSource::name_table, hit->confidence};
  }
  return GenderResult{};
}

AgeResult extract_age(const UserProfile& profile, const FaceClient& faces) {
  if (auto face = single_face(profile, faces); face && face->age) return AgeResult{face->age, age_bucket(*face->age)};
  return AgeResult{};
}

// Ethnicity -----------------------------------------------------------------

std::vector<std::string> char_ngrams(std::string_view name, int order) {
  const auto folded = casefold(trim(name));
  std::vector<std::string> symbols;
  const auto* bytes = reinterpret_cast<const uint8_t*>(folded.data());
  const auto length = static_cast<int32_t>(folded.size());
  for (int i = 1; i < order; ++i) symbols.emplace_back("<");
  for (int32_t i = 0; i < length;) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    symbols.emplace_back(folded.substr(static_cast<std::size_t>(start), static_cast<std::size_t>(i - start)));
  }
  for (int i = 1; i < order; ++i) symbols.emplace_back(">");
  std::vector<std::string> grams;
  const auto n = static_cast<std::size_t>(order);
  for (std::size_t i = 0; i + n <= symbols.size(); ++i) {
    std::string g;
    for (std::size_t k = 0; k < n; ++k) g += symbols[i + k];
    grams.push_back(std::move(g));
  }
  return grams;
}

NameEthnicityModel::NameEthnicityModel(int ngram_order, double smoothing, std::vector<std::string> labels,
                                       std::vector<double> log_priors,
                                       std::unordered_map<std::string, std::vector<double>> log_likelihoods)
    : ngram_order_(ngram_order),
      smoothing_(smoothing),
      labels_(std::move(labels)),
      log_priors_(std::move(log_priors)),
      log_likelihoods_(std::move(log_likelihoods)) {
  if (labels_.size() < 2) throw ValidationError("name classifier needs at least two classes");
  if (log_priors_.size() != labels_.size()) throw ValidationError("one prior per class required");
  for (const auto& [g, row] : log_likelihoods_)
    if (row.size() != labels_.size()) throw ValidationError("likelihood row for '" + g + "' has wrong width");
}

std::vector<double> NameEthnicityModel::posterior(std::string_view name) const {
  if (trim(name).empty()) throw ValidationError("empty name");
  std::vector<double> log_post = log_priors_;
  for (const auto& g : char_ngrams(name, ngram_order_)) {
    auto it = log_likelihoods_.find(g);
    if (it == log_likelihoods_.end()) continue;
    for (std::size_t c = 0; c < labels_.size(); ++c) log_post[c] += it->second[c];
  }
  const double peak = *std::max_element(log_post.begin(), log_post.end());
  double total = 0;
  for (auto& v : log_post) {
    v = std::exp(v - peak);
    total += v;
  }
  for (auto& v : log_post) v /= total;
  return log_post;
}

NameEthnicityModel train_name_classifier(std::span<const LabeledName> examples, int ngram_order, double smoothing) {
  if (ngram_order < 1) throw ValidationError("n-gram order must be positive");
  if (!(smoothing > 0)) throw ValidationError("smoothing must be positive");
  std::set<std::string> label_set;
  for (const auto& ex : examples)
    if (!trim(ex.label).empty()) label_set.insert(trim(ex.label));
  if (label_set.size() < 2) throw ValidationError("name classifier needs examples from at least two classes");
  std::vector<std::string> labels(label_set.begin(), label_set.end());
  std::map<std::string, std::size_t> label_index;
  for (std::size_t i = 0; i < labels.size(); ++i) label_index[labels[i]] = i;

  std::vector<double> class_docs(labels.size(), 0), class_grams(labels.size(), 0);
  std::unordered_map<std::string, std::vector<double>> counts;
  for (const auto& ex : examples) {
    const auto label = trim(ex.label);
    if (label.empty() || trim(ex.name).empty()) continue;
    const auto c = label_index.at(label);
    class_docs[c] += 1;
    for (auto& g : char_ngrams(ex.name, ngram_order)) {
      auto& row = counts[g];
      if (row.empty()) row.assign(labels.size(), 0);
      row[c] += 1;
      class_grams[c] += 1;
    }
  }
  double docs = 0;
  for (double d : class_docs) docs += d;
  std::vector<double> log_priors(labels.size());
  for (std::size_t c = 0; c < labels.size(); ++c) {
    if (class_docs[c] == 0) throw ValidationError("class '" + labels[c] + "' has no usable examples");
    log_priors[c] = std::log(class_docs[c] / docs);
  }
  const double vocab = static_cast<double>(counts.size());
  for (auto& [g, row] : counts)
    for (std::size_t c = 0; c < labels.size(); ++c)
      row[c] = std::log((row[c] + smoothing) / (class_grams[c] + smoothing * vocab));
  return NameEthnicityModel(ngram_order, smoothing, std::move(labels), std::move(log_priors), std::move(counts));
}

EthnicityResult classify_ethnicity(std::string_view name, const NameEthnicityModel& model) {
  EthnicityResult result;
  if (trim(name).empty()) {
    result.error = "empty name";
    return result;
  }
  const auto post = model.posterior(name);
  // labels() is sorted, so the first maximum is the lexicographically smallest.
  std::size_t best = 0;
  for (std::size_t c = 1; c < post.size(); ++c)
    if (post[c] > post[best]) best = c;
  result.label = model.labels()[best];
  result.confidence = post[best];
  for (auto& part : split(result.label, '>'))
    if (auto t = trim(part); !t.empty()) result.path.push_back(std::move(t));
  return result;
}

std::vector<LabeledName> load_labeled_names(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open labeled names '" + path.string() + "'");
  std::vector<LabeledName> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = csv::parse_line(line);
    if (!fields || fields->size() != 2) throw ParseError(path.string(), lineno, "expected name,class");
    if (lineno == 1 && (*fields)[0] == "name") continue;
    out.push_back(LabeledName{(*fields)[0], (*fields)[1]});
  }
  return out;
}

// Location ------------------------------------------------------------------

LocationResult make_location(const Place& place, LocationSource source, std::size_t support, VoteLevel level) {
  LocationResult r;
  r.source = source;
  r.supporting_count = support;
  r.level = level;
  if (!place.country.empty()) r.country = place.country;
  if (r.country && !place.region.empty()) r.region = place.region;
  if (r.region && !place.city.empty()) r.city = place.city;
  return r;
}

namespace {

template <class Key>
std::optional<std::pair<Key, std::size_t>> unique_max(const std::map<Key, std::size_t>& counts) {
  std::optional<std::pair<Key, std::size_t>> best;
  bool tied = false;
  for (const auto& [k, n] : counts) {
    if (!best || n > best->second) {
      best = std::make_pair(k, n);
      tied = false;
    } else if (n == best->second) {
      tied = true;
    }
  }
  if (tied) return std::nullopt;
  return best;
}

}  // namespace

LocationResult resolve_location(const UserProfile& user, std::span<const Tweet> user_tweets,
                                const Gazetteer& gazetteer, double radius_km) {
  std::vector<std::pair<Timestamp, Place>> votes;
  for (const auto& t : user_tweets) {
    if (!t.geo) continue;
    if (auto place = gazetteer.reverse(*t.geo, radius_km)) votes.emplace_back(t.created_at, std::move(*place));
  }

  if (!votes.empty()) {
    std::map<Place, std::size_t> by_city;
    std::map<Place, std::size_t> by_region;
    std::map<Place, std::size_t> by_country;
    for (const auto& [when, p] : votes) {
      ++by_city[p];
      ++by_region[Place{p.country, p.region, ""}];
      ++by_country[Place{p.country, "", ""}];
    }
    if (auto w = unique_max(by_city)) return make_location(w->first, LocationSource::geo_majority, w->second, VoteLevel::city);
    if (auto w = unique_max(by_region))
      return make_location(w->first, LocationSource::geo_majority, w->second, VoteLevel::region);
    if (auto w = unique_max(by_country))
      return make_location(w->first, LocationSource::geo_majority, w->second, VoteLevel::country);
    // Latest tweet wins; equal timestamps resolve to the later tweet in input order.
    std::size_t latest = 0;
    for (std::size_t i = 1; i < votes.size(); ++i)
      if (votes[i].first >= votes[latest].first) latest = i;
    const auto& place = votes[latest].second;
    return make_location(place, LocationSource::geo_majority, by_city[place], VoteLevel::most_recent);
  }

  if (user.profile_location_text && !trim(*user.profile_location_text).empty()) {
    if (auto place = gazetteer.lookup(*user.profile_location_text))
      return make_location(*place, LocationSource::profile_text, 0, VoteLevel::none);
  }
  return LocationResult{};
}

// Per-user ------------------------------------------------------------------

namespace {

// Gender and age share one face lookup per user. A failed lookup is
// reported once; the replay yields "nothing found".
class OnceFaceClient final : public FaceClient {
 public:
  explicit OnceFaceClient(const FaceClient& inner) : inner_(inner) {}

  std::optional<FaceObservation> analyze(std::string_view image_ref) const override {
    if (done_) return result_;
    done_ = true;
    result_ = inner_.analyze(image_ref);
    return result_;
  }

 private:
  const FaceClient& inner_;
  mutable bool done_ = false;
  mutable std::optional<FaceObservation> result_;
};

}  // namespace

DemographicRecord extract_demographics(const UserProfile& user, std::span<const Tweet> user_tweets,
                                       const DemographicSources& sources) {
  DemographicRecord rec;
  rec.user_id = user.user_id;
  const OnceFaceClient faces(sources.faces);
  rec.gender = extract_gender(user, faces, sources.names);
  rec.age = extract_age(user, faces);
  if (sources.ethnicity) {
    rec.ethnicity = classify_ethnicity(user.display_name, *sources.ethnicity);
  } else {
    rec.ethnicity.error = "no ethnicity model";
  }
  rec.location = resolve_location(user, user_tweets, sources.gazetteer, sources.radius_km);
  return rec;
}

void write_demographics_csv(std::ostream& out, std::span<const DemographicRecord> records) {
  csv::write_row(out, {"user_id", "gender", "gender_source", "gender_confidence", "age_years", "age_bucket",
                       "ethnicity", "ethnicity_confidence", "ethnicity_path", "country", "region", "city",
                       "location_source", "location_support"});
  for (const auto& r : records) {
    std::string path;
    for (const auto& p : r.ethnicity.path) path += (path.empty() ? "" : ">") + p;
    csv::write_row(out, {r.user_id, to_string(r.gender.value), to_string(r.gender.source),
                         csv::fixed(r.gender.confidence, 6), r.age.years ? std::to_string(*r.age.years) : "",
                         to_string(r.age.bucket), r.ethnicity.label,
                         r.ethnicity.assigned() ? csv::fixed(r.ethnicity.confidence, 6) : "", path,
                         r.location.country.value_or(""), r.location.region.value_or(""),
                         r.location.city.value_or(""), to_string(r.location.source),
                         std::to_string(r.location.supporting_count)});
  }
}

std::vector<DemographicRecord> read_demographics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open demographics '" + path.string() + "'");
  std::vector<DemographicRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 || trim(line).empty()) continue;
    auto fields = csv::parse_line(line);
    if (!fields || fields->size() != 14) throw ParseError(path.string(), lineno, "expected 14 columns");
    const auto& f = *fields;
    DemographicRecord r;
    r.user_id = f[0];
    try {
      r.gender.value = parse_gender(f[1]);
      r.gender.source = f[2] == "face_service" ? GenderSource::face_service
                        : f[2] == "name_table" ? GenderSource::name_table
                                               : GenderSource::none;
      r.gender.confidence = std::stod(f[3]);
      if (!f[4].empty()) r.age.years = std::stoi(f[4]);
      r.age.bucket = parse_age_bucket(f[5]);
      r.ethnicity.label = f[6];
      if (!f[7].empty()) r.ethnicity.confidence = std::stod(f[7]);
      if (!f[8].empty()) r.ethnicity.path = split(f[8], '>');
      Place place{f[9], f[10], f[11]};
      r.location = make_location(place, parse_location_source(f[12]), std::stoul(f[13]), VoteLevel::none);
    } catch (const std::exception&) {
      throw ParseError(path.string(), lineno, "bad numeric field");
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace stancepipe
