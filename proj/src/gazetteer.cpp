#include "stancepipe/gazetteer.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "stancepipe/csv.hpp"
#include "stancepipe/errors.hpp"
#include "stancepipe/text.hpp"

namespace stancepipe {

double haversine_km(GeoPoint a, GeoPoint b) {
  constexpr double earth_radius_km = 6371.0088;
  constexpr double rad = std::numbers::pi / 180.0;
  const double dlat = (b.latitude - a.latitude) * rad;
  const double dlon = (b.longitude - a.longitude) * rad;
  const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(a.latitude * rad) * std::cos(b.latitude * rad) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2 * earth_radius_km * std::asin(std::min(1.0, std::sqrt(h)));
}

Gazetteer::Gazetteer(std::vector<GazetteerEntry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!entries_[i].place.well_formed())
      throw ValidationError("gazetteer entry '" + entries_[i].name + "' breaks the country/region/city hierarchy");
    auto add = [&](const std::string& name) {
      auto key = fold_key(name);
      if (key.empty()) return;
      auto& bucket = by_key_[key];
      if (bucket.empty() || bucket.back() != i) bucket.push_back(i);
    };
    add(entries_[i].name);
    for (const auto& alt : entries_[i].alternate_names) add(alt);
  }
}

Gazetteer Gazetteer::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open gazetteer '" + path.string() + "'");
  std::vector<GazetteerEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = csv::parse_line(line);
    if (!fields || fields->size() != 8) throw ParseError(path.string(), lineno, "expected 8 columns");
    auto& f = *fields;
    if (lineno == 1 && f[0] == "name") continue;
    GazetteerEntry e;
    e.name = trim(f[0]);
    for (auto& alt : split(f[1], '|'))
      if (auto t = trim(alt); !t.empty()) e.alternate_names.push_back(std::move(t));
    e.place = Place{trim(f[2]), trim(f[3]), trim(f[4])};
    try {
      e.latitude = std::stod(f[5]);
      e.longitude = std::stod(f[6]);
      e.population = std::stoull(f[7]);
    } catch (const std::exception&) {
      throw ParseError(path.string(), lineno, "bad coordinate or population");
    }
    if (!e.place.well_formed()) throw ParseError(path.string(), lineno, "city needs region, region needs country");
    entries.push_back(std::move(e));
  }
  return Gazetteer(std::move(entries));
}

std::optional<Place> Gazetteer::best_for_key(const std::string& key) const {
  auto it = by_key_.find(key);
  if (it == by_key_.end()) return std::nullopt;
  const GazetteerEntry* best = nullptr;
  for (auto idx : it->second) {
    const auto& e = entries_[idx];
    if (!best || e.population > best->population || (e.population == best->population && e.place < best->place))
      best = &e;
  }
  return best->place;
}

std::optional<Place> Gazetteer::lookup(std::string_view text) const {
  if (auto whole = best_for_key(fold_key(text))) return whole;
  std::string normalized(text);
  for (auto& c : normalized)
    if (c == '/' || c == ';') c = ',';
  for (const auto& segment : split(normalized, ',')) {
    const auto key = fold_key(segment);
    if (key.empty()) continue;
    if (auto hit = best_for_key(key)) return hit;
  }
  return std::nullopt;
}

std::optional<Place> Gazetteer::reverse(GeoPoint point, double radius_km) const {
  const GazetteerEntry* best = nullptr;
  double best_d = radius_km;
  for (const auto& e : entries_) {
    const double d = haversine_km(point, GeoPoint{e.latitude, e.longitude});
    if (d <= best_d && (!best || d < best_d || e.population > best->population)) {
      best = &e;
      best_d = d;
    }
  }
  if (!best) return std::nullopt;
  return best->place;
}

std::optional<Place> gazetteer_lookup(std::string_view text, const Gazetteer& gazetteer) {
  return gazetteer.lookup(text);
}

}  // namespace stancepipe
