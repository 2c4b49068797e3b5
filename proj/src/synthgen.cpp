#include "stancepipe/synthgen.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "stancepipe/csv.hpp"
#include "stancepipe/errors.hpp"
#include "stancepipe/rng.hpp"
#include "stancepipe/text.hpp"

namespace stancepipe {

namespace {

struct NamePool {
  std::string label;
  std::vector<std::string> male;
  std::vector<std::string> female;
  std::vector<std::string> stems;
  std::vector<std::string> suffixes;
};

const std::vector<NamePool>& name_pools() {
  static const std::vector<NamePool> pools = {
      {"Hispanic",
       {"Jose", "Juan", "Carlos", "Javier", "Miguel", "Antonio", "Pablo", "Jordi"},
       {"Maria", "Carmen", "Lucia", "Laura", "Marta", "Elena", "Montserrat", "Nuria"},
       {"Garc", "Rodr", "Fern", "Lop", "Mart", "Sanch", "Gonz", "Ram", "Dom", "Herr"},
       {"ia", "iguez", "andez", "ez", "inez", "ado", "ero", "ales"}},
      {"European>Italian",
       {"Marco", "Luca", "Giuseppe", "Matteo", "Alessandro", "Davide", "Stefano", "Paolo"},
       {"Giulia", "Francesca", "Chiara", "Sara", "Paola", "Alessia", "Federica", "Valentina"},
       {"Ross", "Bianch", "Ferr", "Espos", "Colomb", "Ricc", "Marin", "Gall", "Cont", "Mor"},
       {"i", "ini", "etti", "ello", "one", "ucci", "azzo", "otti"}},
      {"European>British",
       {"James", "John", "David", "Michael", "George", "Harry", "Thomas", "William"},
       {"Emma", "Olivia", "Sarah", "Emily", "Charlotte", "Sophie", "Jessica", "Amelia"},
       {"Smi", "John", "Will", "Tay", "Brow", "Rob", "Thomp", "Walk", "Hugh", "Ash"},
       {"son", "th", "ington", "ley", "field", "wood", "er", "by"}},
      {"European>French",
       {"Pierre", "Jean", "Louis", "Antoine", "Nicolas", "Julien", "Mathieu", "Remy"},
       {"Camille", "Chloe", "Manon", "Juliette", "Amelie", "Claire", "Margaux", "Elodie"},
       {"Dub", "Mor", "Lef", "Gir", "Bon", "Rouss", "Fourn", "Mich", "Laur", "Gauth"},
       {"ois", "eau", "ier", "ard", "ault", "elle", "eux", "and"}},
      {"Asian>EastAsian",
       {"Wei", "Hiroshi", "Jun", "Takeshi", "Min", "Jian", "Kenji", "Hao"},
       {"Mei", "Yuki", "Hana", "Xiu", "Aiko", "Lin", "Sakura", "Ying"},
       {"Zh", "Ts", "Ch", "W", "Y", "K", "L", "Nakam", "Tan", "Hay"},
       {"ang", "uko", "en", "u", "ai", "eng", "ata", "ura"}},
  };
  return pools;
}

// Ethnicity mix by country of residence, in name_pools() order.
std::vector<double> ethnicity_weights(const std::string& country) {
  if (country == "Spain") return {0.60, 0.10, 0.15, 0.10, 0.05};
  if (country == "Italy") return {0.10, 0.60, 0.15, 0.10, 0.05};
  return {0.20, 0.20, 0.20, 0.20, 0.20};
}

std::size_t pick_weighted(Rng& rng, const std::vector<double>& weights) {
  double total = 0;
  for (double w : weights) total += w;
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return weights.size() - 1;
}

std::string person_name(Rng& rng, const NamePool& pool, Gender gender) {
  const auto& first = gender == Gender::female ? pool.female : pool.male;
  return rng.pick(first) + " " + rng.pick(pool.stems) + rng.pick(pool.suffixes);
}

const std::vector<std::string> kSyllables = {"ka", "lo", "mi", "nu", "pe", "ri", "so", "ta", "vu", "ze"};

std::vector<std::string> pseudo_words(const std::string& prefix, std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(prefix + kSyllables[(i / 100) % 10] + kSyllables[(i / 10) % 10] + kSyllables[i % 10]);
  return out;
}

const std::vector<std::string> kStopwords = {"el", "la", "de", "que", "y", "en", "il", "di", "che", "per", "the", "of"};
const std::vector<std::string> kUnresolvable = {"somewhere over the rainbow", "planet earth", "in your heart",
                                                "the internet"};

struct TweetDraft {
  std::string text;
  std::vector<std::string> hashtags;
};

class TextMaker {
 public:
  TextMaker(const Lexicons& lex, Rng& rng) : lex_(lex), rng_(rng) {}

  TweetDraft make(TruthClass cls) {
    std::vector<std::string> words;
    const std::vector<std::string>* lexicon = nullptr;
    if (cls == TruthClass::positive) lexicon = &lex_.positive;
    if (cls == TruthClass::negative) lexicon = &lex_.negative;
    if (cls == TruthClass::neutral) lexicon = &lex_.neutral;
    if (lexicon) {
      const auto n = rng_.between(2, 4);
      for (long long i = 0; i < n; ++i) words.push_back(rng_.pick(*lexicon));
      const auto m = rng_.between(2, 4);
      for (long long i = 0; i < m; ++i) words.push_back(rng_.pick(lex_.background));
    } else {
      const auto m = rng_.between(4, 7);
      for (long long i = 0; i < m; ++i) words.push_back(rng_.pick(lex_.background));
    }
    if (rng_.bernoulli(0.5)) words.push_back(rng_.pick(kStopwords));
    rng_.shuffle(words);
    if (rng_.bernoulli(0.3) && !words.empty()) words[0][0] = static_cast<char>(std::toupper(words[0][0]));

    TweetDraft d;
    if (cls != TruthClass::off_topic) {
      if (rng_.bernoulli(0.5)) {
        words.push_back("#Referendum2017");
        d.hashtags.push_back("referendum2017");
      } else {
        words.insert(words.begin() + static_cast<long>(rng_.below(words.size() + 1)), "Referendum");
      }
    }
    if (rng_.bernoulli(0.3)) words.push_back("https://t.co/" + std::to_string(rng_.below(1000000)));
    for (std::size_t i = 0; i < words.size(); ++i) d.text += (i ? " " : "") + words[i];
    if (rng_.bernoulli(0.2)) d.text += "!!!";
    return d;
  }

 private:
  const Lexicons& lex_;
  Rng& rng_;
};

struct BuiltinPlace {
  const char* name;
  const char* alternates;
  const char* country;
  const char* region;
  const char* city;
  double lat, lon;
  std::uint64_t population;
};

const BuiltinPlace kPlaces[] = {
    {"Spain", "España|Espanya|Espana", "Spain", "", "", 40.2, -3.5, 47400000},
    {"Italy", "Italia", "Italy", "", "", 42.8, 12.6, 59000000},
    {"France", "", "France", "", "", 46.6, 2.2, 67800000},
    {"Georgia", "Sakartvelo", "Georgia", "", "", 42.3, 43.4, 3700000},
    {"United States", "USA|United States of America", "United States", "", "", 39.8, -98.6, 331000000},
    {"Catalonia", "Catalunya|Cataluña|Cataluna", "Spain", "Catalonia", "", 41.8, 1.5, 7700000},
    {"Andalusia", "Andalucía|Andalucia", "Spain", "Andalusia", "", 37.5, -4.7, 8500000},
    {"Community of Madrid", "Comunidad de Madrid", "Spain", "Community of Madrid", "", 40.55, -3.95, 6700000},
    {"Valencian Community", "Comunitat Valenciana|Comunidad Valenciana", "Spain", "Valencian Community", "", 39.5,
     -0.75, 5000000},
    {"Galicia", "", "Spain", "Galicia", "", 42.75, -7.9, 2700000},
    {"Lombardy", "Lombardia", "Italy", "Lombardy", "", 45.6, 9.8, 10000000},
    {"Veneto", "", "Italy", "Veneto", "", 45.65, 11.85, 4900000},
    {"Lazio", "Latium", "Italy", "Lazio", "", 41.65, 12.95, 5700000},
    {"Emilia-Romagna", "Emilia Romagna", "Italy", "Emilia-Romagna", "", 44.5, 11.0, 4400000},
    {"Tuscany", "Toscana", "Italy", "Tuscany", "", 43.35, 11.0, 3700000},
    {"Georgia", "Georgia USA", "United States", "Georgia", "", 32.7, -83.4, 10700000},
    {"Barcelona", "BCN", "Spain", "Catalonia", "Barcelona", 41.3874, 2.1686, 1620000},
    {"Girona", "Gerona", "Spain", "Catalonia", "Girona", 41.9794, 2.8214, 103000},
    {"Tarragona", "", "Spain", "Catalonia", "Tarragona", 41.1189, 1.2445, 135000},
    {"Lleida", "Lérida|Lerida", "Spain", "Catalonia", "Lleida", 41.6176, 0.62, 140000},
    {"Madrid", "", "Spain", "Community of Madrid", "Madrid", 40.4168, -3.7038, 3300000},
    {"Alcalá de Henares", "Alcala de Henares", "Spain", "Community of Madrid", "Alcalá de Henares", 40.482,
     -3.3635, 195000},
    {"Seville", "Sevilla", "Spain", "Andalusia", "Seville", 37.3891, -5.9845, 690000},
    {"Málaga", "Malaga", "Spain", "Andalusia", "Málaga", 36.7213, -4.4214, 580000},
    {"Granada", "", "Spain", "Andalusia", "Granada", 37.1773, -3.5986, 230000},
    {"Valencia", "València", "Spain", "Valencian Community", "Valencia", 39.4699, -0.3763, 800000},
    {"A Coruña", "La Coruña|Coruna", "Spain", "Galicia", "A Coruña", 43.3623, -8.4115, 245000},
    {"Milan", "Milano", "Italy", "Lombardy", "Milan", 45.4642, 9.19, 1370000},
    {"Bergamo", "", "Italy", "Lombardy", "Bergamo", 45.6983, 9.6773, 120000},
    {"Brescia", "", "Italy", "Lombardy", "Brescia", 45.5416, 10.2118, 196000},
    {"Venice", "Venezia", "Italy", "Veneto", "Venice", 45.4408, 12.3155, 260000},
    {"Verona", "", "Italy", "Veneto", "Verona", 45.4384, 10.9916, 258000},
    {"Rome", "Roma", "Italy", "Lazio", "Rome", 41.9028, 12.4964, 2870000},
    {"Bologna", "", "Italy", "Emilia-Romagna", "Bologna", 44.4949, 11.3426, 390000},
    {"Florence", "Firenze", "Italy", "Tuscany", "Florence", 43.7696, 11.2558, 380000},
    {"Atlanta", "", "United States", "Georgia", "Atlanta", 33.749, -84.388, 500000},
    {"Tbilisi", "Tiflis", "Georgia", "Tbilisi", "Tbilisi", 41.7151, 44.8271, 1100000},
};

std::string fmt2(double v) { return csv::fixed(v, 2); }

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write '" + p.string() + "'");
  return out;
}

}  // namespace

Lexicons Lexicons::make_default(std::size_t per_class, std::size_t background) {
  return Lexicons{pseudo_words("pro", per_class), pseudo_words("contra", per_class), pseudo_words("neu", per_class),
                  pseudo_words("bas", background)};
}

std::vector<RegionSpec> SynthSpec::default_regions() {
  return {
      {"Catalonia", 0.40, PolarityMix{0.55, 0.25, 0.20}},
      {"Lombardy", 0.25, PolarityMix{0.40, 0.35, 0.25}},
      {"Community of Madrid", 0.20, PolarityMix{0.15, 0.60, 0.25}},
      {"Andalusia", 0.15, PolarityMix{0.20, 0.55, 0.25}},
  };
}

void SynthSpec::validate() const {
  std::vector<std::string> bad;
  auto check_mix = [&](const PolarityMix& m, const std::string& where) {
    double s = 0;
    for (double x : m) {
      if (x < 0) bad.push_back(where + " has a negative share");
      s += x;
    }
    if (std::abs(s - 1.0) > 1e-9) bad.push_back(where + " must sum to 1");
  };
  if (n_users == 0) bad.push_back("n_users must be positive");
  if (bot_fraction < 0 || bot_fraction >= 1) bad.push_back("bot_fraction must lie in [0, 1)");
  if (outlier_fraction < 0 || outlier_fraction >= 1) bad.push_back("outlier_fraction must lie in [0, 1)");
  if (bot_fraction + outlier_fraction > 1) bad.push_back("bot_fraction + outlier_fraction exceeds 1");
  check_mix(polarity_mix, "polarity_mix");
  if (tweets_min == 0 || tweets_min > tweets_max) bad.push_back("need 1 <= tweets_min <= tweets_max");
  for (double p : {relevant_probability, own_class_probability, off_topic_probability, geotag_user_fraction, profile_location_fraction,
                   image_fraction})
    if (p < 0 || p > 1) bad.push_back("probabilities must lie in [0, 1]");
  if (!(outlier_volume_factor > 1)) bad.push_back("outlier_volume_factor must exceed 1");
  if (collection_days <= 0) bad.push_back("collection_days must be positive");

  std::set<std::string> seen;
  for (const auto* lex : {&lexicons.positive, &lexicons.negative, &lexicons.neutral, &lexicons.background}) {
    if (lex->empty()) bad.push_back("every lexicon class needs at least one token");
    for (const auto& w : *lex) {
      if (!seen.insert(w).second) bad.push_back("lexicon token '" + w + "' appears in more than one class");
      if (w.find_first_of(" \t") != std::string::npos) bad.push_back("lexicon token '" + w + "' contains whitespace");
    }
  }
  if (regions.empty()) bad.push_back("at least one region is required");
  std::set<std::string> known;
  for (const auto& p : kPlaces)
    if (*p.region && !*p.city) known.insert(p.region);
  for (const auto& r : regions) {
    if (!(r.weight > 0)) bad.push_back("region '" + r.name + "' needs a positive weight");
    if (!known.count(r.name)) bad.push_back("region '" + r.name + "' is not in the built-in gazetteer");
    if (r.mix) check_mix(*r.mix, "mix of region '" + r.name + "'");
  }
  if (!bad.empty()) throw ConfigError(bad);
}

const char* to_string(TruthClass c) {
  switch (c) {
    case TruthClass::positive: return "positive";
    case TruthClass::negative: return "negative";
    case TruthClass::neutral: return "neutral";
    case TruthClass::non_relevant: return "non_relevant";
    case TruthClass::off_topic: return "off_topic";
  }
  return "non_relevant";
}

std::vector<GazetteerEntry> builtin_gazetteer() {
  std::vector<GazetteerEntry> out;
  for (const auto& p : kPlaces) {
    GazetteerEntry e;
    e.name = p.name;
    for (auto& a : split(p.alternates, '|'))
      if (!a.empty()) e.alternate_names.push_back(a);
    e.place = Place{p.country, p.region, p.city};
    e.latitude = p.lat;
    e.longitude = p.lon;
    e.population = p.population;
    out.push_back(std::move(e));
  }
  return out;
}

SynthCorpus generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  SynthCorpus c;
  c.gazetteer = builtin_gazetteer();
  c.stopwords = kStopwords;
  const Timestamp end = spec.collection_end;
  const Timestamp start = end - std::chrono::days(spec.collection_days);
  c.topic = TopicConfig::make({"referendum"}, {"referendum2017"}, {}, start, end);

  std::map<std::string, std::vector<const GazetteerEntry*>> cities_by_region;
  std::map<std::string, const GazetteerEntry*> country_entry;
  for (const auto& e : c.gazetteer) {
    if (!e.place.city.empty()) cities_by_region[e.place.region].push_back(&e);
    if (e.place.region.empty()) country_entry[e.place.country] = &e;
  }
  std::vector<const GazetteerEntry*> all_cities;
  for (const auto& e : c.gazetteer)
    if (!e.place.city.empty()) all_cities.push_back(&e);

  // Exact bot / outlier allocation over a shuffled index order.
  const auto n = spec.n_users;
  const auto n_bots = static_cast<std::size_t>(std::llround(spec.bot_fraction * static_cast<double>(n)));
  const auto n_outliers = static_cast<std::size_t>(std::llround(spec.outlier_fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);
  std::vector<char> is_bot(n, 0), is_outlier(n, 0);
  for (std::size_t i = 0; i < n_bots; ++i) is_bot[order[i]] = 1;
  for (std::size_t i = n_bots; i < n_bots + n_outliers && i < n; ++i) is_outlier[order[i]] = 1;

  std::vector<double> region_weights;
  for (const auto& r : spec.regions) region_weights.push_back(r.weight);

  TextMaker maker(spec.lexicons, rng);
  std::size_t tweet_seq = 0;
  std::set<std::string> first_names;

  for (std::size_t i = 0; i < n; ++i) {
    char idbuf[32];
    std::snprintf(idbuf, sizeof idbuf, "u%06zu", i + 1);
    UserTruth truth;
    truth.user_id = idbuf;
    truth.is_bot = is_bot[i];
    truth.is_outlier = is_outlier[i];

    const auto& region = spec.regions[pick_weighted(rng, region_weights)];
    const auto& mix = region.mix ? *region.mix : spec.polarity_mix;
    const auto pol = pick_weighted(rng, {mix[0], mix[1], mix[2]});
    truth.polarity = pol == 0 ? UserPolarity::Value::positive
                     : pol == 1 ? UserPolarity::Value::negative
                                : UserPolarity::Value::neutral;
    const auto& home_city = *rng.pick(cities_by_region.at(region.name));
    truth.home = home_city.place;
    truth.gender = rng.bernoulli(0.5) ? Gender::female : Gender::male;
    truth.age = static_cast<int>(rng.between(14, 75));
    const auto& pool = name_pools()[pick_weighted(rng, ethnicity_weights(truth.home.country))];
    truth.ethnicity = pool.label;

    UserProfile user;
    user.user_id = truth.user_id;
    user.screen_name = "user" + truth.user_id.substr(1);
    user.display_name = rng.bernoulli(0.9) ? person_name(rng, pool, truth.gender)
                                           : "xX" + rng.pick(spec.lexicons.background) + "Xx";
    first_names.insert(user.display_name.substr(0, user.display_name.find(' ')));

    const auto age_days = rng.between(31, 3650);
    user.created_at = end - std::chrono::days(age_days);
    const auto months = std::max<long long>(age_days / 30, 1);
    double rate = rng.uniform(5.0, 15.0);
    if (truth.is_outlier) rate *= spec.outlier_volume_factor;
    user.post_count = static_cast<std::uint64_t>(std::llround(rate * static_cast<double>(months)));

    if (rng.bernoulli(spec.image_fraction)) {
      user.profile_image_ref = "img/" + truth.user_id + ".jpg";
      FaceFixture face;
      face.image = *user.profile_image_ref;
      const double r = rng.uniform();
      face.gender = truth.gender;
      face.age = truth.age;
      face.confidence = std::round(rng.uniform(0.75, 0.99) * 100) / 100;
      if (r < 0.80) face.face_count = 1;
      else if (r < 0.90) face.face_count = 2;
      else if (r < 0.98) face.face_count = 0;
      else face.transport_error = true;
      c.faces.push_back(face);
    }

    const bool geotagger = rng.bernoulli(spec.geotag_user_fraction);
    if (rng.bernoulli(spec.profile_location_fraction)) {
      const double r = rng.uniform();
      const auto* country = country_entry.at(home_city.place.country);
      if (r < 0.35) {
        user.profile_location_text = home_city.name;
      } else if (r < 0.65) {
        const auto& city_name = home_city.alternate_names.empty() ? home_city.name : home_city.alternate_names.front();
        const auto& country_name = country->alternate_names.empty() ? country->name : country->alternate_names.front();
        user.profile_location_text = city_name + ", " + country_name;
      } else if (r < 0.9) {
        user.profile_location_text = home_city.place.region;
      } else {
        user.profile_location_text = rng.pick(kUnresolvable);
      }
    }

    // Tweets
    const auto base = rng.between(static_cast<long long>(spec.tweets_min), static_cast<long long>(spec.tweets_max));
    const auto n_tweets = static_cast<std::size_t>(truth.is_outlier ? base * static_cast<long long>(spec.outlier_volume_factor) : base);
    std::vector<long long> offsets;
    const long long window_s = static_cast<long long>(spec.collection_days) * 86400;
    if (truth.is_bot) {
      const long long step = 60 * rng.between(1, 10);
      const long long first = rng.between(0, std::max<long long>(0, window_s - step * static_cast<long long>(n_tweets) - 1));
      for (std::size_t k = 0; k < n_tweets; ++k) offsets.push_back(first + step * static_cast<long long>(k));
    } else {
      for (std::size_t k = 0; k < n_tweets; ++k) offsets.push_back(rng.between(0, window_s - 1));
      std::sort(offsets.begin(), offsets.end());
    }
    for (std::size_t k = 0; k < n_tweets; ++k) {
      TruthClass cls;
      if (rng.bernoulli(spec.off_topic_probability)) {
        cls = TruthClass::off_topic;
      } else if (rng.bernoulli(spec.relevant_probability)) {
        std::size_t k_cls = pol;
        if (!rng.bernoulli(spec.own_class_probability)) k_cls = (pol + 1 + rng.below(2)) % 3;
        cls = static_cast<TruthClass>(k_cls);
      } else {
        cls = TruthClass::non_relevant;
      }
      auto draft = maker.make(cls);
      Tweet t;
      char tbuf[32];
      std::snprintf(tbuf, sizeof tbuf, "t%08zu", ++tweet_seq);
      t.tweet_id = tbuf;
      t.user_id = user.user_id;
      t.created_at = start + std::chrono::seconds(offsets[k]);
      t.text = std::move(draft.text);
      t.hashtags = std::move(draft.hashtags);
      t.is_retweet = truth.is_bot ? rng.bernoulli(0.9) : rng.bernoulli(0.15);
      if (geotagger && (k == 0 || rng.bernoulli(0.6))) {
        const GazetteerEntry* where = &home_city;
        if (k > 0 && rng.bernoulli(0.1)) where = rng.pick(all_cities);
        t.geo = GeoPoint{where->latitude + rng.uniform(-0.015, 0.015), where->longitude + rng.uniform(-0.015, 0.015)};
      }
      c.tweet_truth.push_back(TweetTruth{t.tweet_id, t.user_id, cls});
      c.tweets.push_back(std::move(t));
    }

    const double score = truth.is_bot ? rng.uniform(60.0, 100.0) : rng.uniform(0.0, 30.0);
    c.bot_scores.emplace_back(user.user_id, std::round(score * 100) / 100);
    c.users.push_back(std::move(user));
    c.user_truth.push_back(std::move(truth));
  }

  for (const auto& pool : name_pools()) {
    for (const auto& f : pool.male) c.name_genders.emplace_back(f, Gender::male, 0.97);
    for (const auto& f : pool.female) c.name_genders.emplace_back(f, Gender::female, 0.97);
    for (std::size_t k = 0; k < spec.labeled_names_per_class; ++k)
      c.labeled_names.push_back(
          LabeledName{person_name(rng, pool, rng.bernoulli(0.5) ? Gender::female : Gender::male), pool.label});
  }

  auto add_labeled = [&](TruthClass cls, TweetLabel label, std::size_t count) {
    for (std::size_t k = 0; k < count; ++k) c.labeled_tweets.push_back(LabeledTweet{maker.make(cls).text, label});
  };
  add_labeled(TruthClass::positive, TweetLabel::positive, spec.labeled_positive);
  add_labeled(TruthClass::negative, TweetLabel::negative, spec.labeled_negative);
  add_labeled(TruthClass::neutral, TweetLabel::neutral, spec.labeled_neutral);
  add_labeled(TruthClass::non_relevant, TweetLabel::non_relevant, spec.labeled_non_relevant);

  for (const auto& r : spec.regions) {
    const auto& mix = r.mix ? *r.mix : spec.polarity_mix;
    const double yes = mix[0] + mix[1] > 0 ? 100.0 * mix[0] / (mix[0] + mix[1]) : 0.0;
    c.official.push_back(OfficialResult{r.name, std::round(yes * 100) / 100, std::round(rng.uniform(30, 60) * 100) / 100});
  }
  return c;
}

void write_gazetteer_csv(std::ostream& out, const std::vector<GazetteerEntry>& entries) {
  csv::write_row(out, {"name", "alternate_names", "country", "region", "city", "latitude", "longitude", "population"});
  for (const auto& e : entries) {
    std::string alts;
    for (const auto& a : e.alternate_names) alts += (alts.empty() ? "" : "|") + a;
    csv::write_row(out, {e.name, alts, e.place.country, e.place.region, e.place.city, csv::fixed(e.latitude, 4),
                         csv::fixed(e.longitude, 4), std::to_string(e.population)});
  }
}

std::vector<std::filesystem::path> write_corpus(const SynthCorpus& c, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  auto file = [&](const char* name) {
    written.push_back(dir / name);
    return open_out(dir / name);
  };
  {
    auto out = file(CorpusFiles::users);
    for (const auto& u : c.users) out << to_record(u) << '\n';
  }
  {
    auto out = file(CorpusFiles::tweets);
    for (const auto& t : c.tweets) out << to_record(t) << '\n';
  }
  {
    auto out = file(CorpusFiles::bot_scores);
    for (const auto& [id, s] : c.bot_scores) out << nlohmann::json{{"user_id", id}, {"score", s}}.dump() << '\n';
  }
  {
    auto out = file(CorpusFiles::faces);
    for (const auto& f : c.faces) {
      nlohmann::json j{{"image", f.image}};
      if (f.transport_error) {
        j["error"] = "timeout";
      } else {
        j["face_count"] = f.face_count;
        if (f.face_count > 0) {
          j["gender"] = to_string(f.gender);
          j["age"] = f.age;
        }
        j["confidence"] = f.confidence;
      }
      out << j.dump() << '\n';
    }
  }
  {
    auto out = file(CorpusFiles::name_gender);
    csv::write_row(out, {"first_name", "gender", "confidence"});
    for (const auto& [name, g, conf] : c.name_genders) csv::write_row(out, {name, to_string(g), fmt2(conf)});
  }
  {
    auto out = file(CorpusFiles::labeled_names);
    csv::write_row(out, {"name", "class"});
    for (const auto& ln : c.labeled_names) csv::write_row(out, {ln.name, ln.label});
  }
  {
    auto out = file(CorpusFiles::labeled_tweets);
    write_labeled_tweets(out, c.labeled_tweets);
  }
  {
    auto out = file(CorpusFiles::gazetteer);
    write_gazetteer_csv(out, c.gazetteer);
  }
  {
    auto out = file(CorpusFiles::official);
    csv::write_row(out, {"location", "official_yes_pct", "turnout_pct"});
    for (const auto& o : c.official) csv::write_row(out, {o.location, fmt2(o.official_yes_pct), fmt2(o.turnout_pct)});
  }
  {
    auto out = file(CorpusFiles::stopwords);
    for (const auto& w : c.stopwords) out << w << '\n';
  }
  {
    auto out = file(CorpusFiles::truth_users);
    csv::write_row(out, {"user_id", "is_bot", "is_outlier", "polarity", "gender", "age", "ethnicity", "country",
                         "region", "city"});
    for (const auto& t : c.user_truth)
      csv::write_row(out, {t.user_id, t.is_bot ? "1" : "0", t.is_outlier ? "1" : "0", to_string(t.polarity),
                           to_string(t.gender), std::to_string(t.age), t.ethnicity, t.home.country, t.home.region,
                           t.home.city});
  }
  {
    auto out = file(CorpusFiles::truth_tweets);
    csv::write_row(out, {"tweet_id", "user_id", "class"});
    for (const auto& t : c.tweet_truth) csv::write_row(out, {t.tweet_id, t.user_id, to_string(t.truth)});
  }
  return written;
}

std::vector<UserTruth> load_user_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<UserTruth> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    if (++lineno == 1 || trim(line).empty()) continue;
    auto f = csv::parse_line(line);
    if (!f || f->size() != 10) throw ParseError(path.string(), lineno, "expected 10 columns");
    UserTruth t;
    t.user_id = (*f)[0];
    t.is_bot = (*f)[1] == "1";
    t.is_outlier = (*f)[2] == "1";
    t.polarity = parse_user_polarity((*f)[3]);
    t.gender = parse_gender((*f)[4]);
    t.age = std::stoi((*f)[5]);
    t.ethnicity = (*f)[6];
    t.home = Place{(*f)[7], (*f)[8], (*f)[9]};
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace stancepipe
