#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "stancepipe/corpus.hpp"

namespace stancepipe {

/// Administrative place. Empty strings mean "not known at this level";
/// a non-empty city implies a region, a non-empty region implies a country.
struct Place {
  std::string country;
  std::string region;
  std::string city;

  bool operator==(const Place&) const = default;
  bool operator<(const Place& o) const {
    return std::tie(country, region, city) < std::tie(o.country, o.region, o.city);
  }
  bool well_formed() const {
    return !country.empty() && (city.empty() || !region.empty());
  }
};

struct GazetteerEntry {
  std::string name;
  std::vector<std::string> alternate_names;
  Place place;
  double latitude = 0;
  double longitude = 0;
  std::uint64_t population = 0;
};

double haversine_km(GeoPoint a, GeoPoint b);

class Gazetteer {
 public:
  Gazetteer() = default;
  explicit Gazetteer(std::vector<GazetteerEntry> entries);

  /// CSV columns: name, alternate_names ('|'-separated), country, region,
  /// city, latitude, longitude, population. A header row is optional.
  static Gazetteer load(const std::filesystem::path& path);

  /// Free-text lookup. The whole text is tried first, then each
  /// comma/slash/semicolon separated segment left to right; the first
  /// segment with any match decides. Among matches for one key the most
  /// populous entry wins (ties: lexicographically smallest place).
  std::optional<Place> lookup(std::string_view text) const;

  /// Nearest entry within `radius_km`, if any.
  std::optional<Place> reverse(GeoPoint point, double radius_km) const;

  const std::vector<GazetteerEntry>& entries() const { return entries_; }

 private:
  std::optional<Place> best_for_key(const std::string& key) const;

  std::vector<GazetteerEntry> entries_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_key_;
};

std::optional<Place> gazetteer_lookup(std::string_view text, const Gazetteer& gazetteer);

}  // namespace stancepipe
