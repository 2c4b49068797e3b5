#include "stancepipe/pipeline.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "stancepipe/csv.hpp"
#include "stancepipe/demographics.hpp"
#include "stancepipe/errors.hpp"
#include "stancepipe/gazetteer.hpp"
#include "stancepipe/log.hpp"
#include "stancepipe/polarity.hpp"
#include "stancepipe/rng.hpp"
#include "stancepipe/text.hpp"

namespace stancepipe {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Typed reads from a config section; type problems become violations.
class Section {
 public:
  Section(const json& doc, std::string name, std::vector<std::string>& bad) : name_(std::move(name)), bad_(bad) {
    if (!doc.contains(name_)) return;
    const auto& s = doc.at(name_);
    if (!s.is_object()) {
      bad_.push_back(name_ + " must be an object");
      return;
    }
    obj_ = &s;
  }

  template <class T>
  void get(const char* key, T& out) {
    const json* v = find(key);
    if (!v || v->is_null()) return;
    try {
      if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v->is_number_integer()) throw std::invalid_argument("integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v->is_number_unsigned() == false && v->get<long long>() < 0) {
            bad_.push_back(where(key) + " must not be negative");
            return;
          }
        }
      }
      out = v->get<T>();
    } catch (const std::exception&) {
      bad_.push_back(where(key) + " has the wrong type");
    }
  }

  void get_path(const char* key, fs::path& out, const fs::path& base) {
    std::string s;
    get(key, s);
    if (!s.empty()) out = base / s;
  }

  void get_path(const char* key, std::optional<fs::path>& out, const fs::path& base) {
    std::string s;
    get(key, s);
    if (!s.empty()) out = base / s;
  }

  void get_time(const char* key, std::optional<Timestamp>& out) {
    std::string s;
    get(key, s);
    if (s.empty()) return;
    try {
      out = parse_timestamp(s);
    } catch (const ValidationError& e) {
      bad_.push_back(where(key) + ": " + e.what());
    }
  }

  void allow(std::initializer_list<const char*> keys) {
    if (!obj_) return;
    for (const auto& [k, v] : obj_->items()) {
      bool known = false;
      for (const char* a : keys) known = known || k == a;
      if (!known) bad_.push_back("unknown key " + where(k.c_str()));
    }
  }

 private:
  const json* find(const char* key) const {
    if (!obj_ || !obj_->contains(key)) return nullptr;
    return &obj_->at(key);
  }
  std::string where(const char* key) const { return name_ + "." + key; }

  std::string name_;
  std::vector<std::string>& bad_;
  const json* obj_ = nullptr;
};

std::vector<std::string> violations(const PipelineConfig& c) {
  std::vector<std::string> bad;
  auto must_exist = [&](const char* what, const fs::path& p) {
    if (p.empty()) {
      bad.push_back(std::string("paths.") + what + " is required");
    } else if (!fs::exists(p)) {
      bad.push_back(std::string("paths.") + what + " does not exist: " + p.string());
    }
  };
  auto may_exist = [&](const char* what, const std::optional<fs::path>& p) {
    if (p) must_exist(what, *p);
  };
  must_exist("users", c.paths.users);
  must_exist("tweets", c.paths.tweets);
  may_exist("bot_scores", c.paths.bot_scores);
  may_exist("faces", c.paths.faces);
  may_exist("name_gender", c.paths.name_gender);
  may_exist("labeled_names", c.paths.labeled_names);
  must_exist("labeled_tweets", c.paths.labeled_tweets);
  must_exist("gazetteer", c.paths.gazetteer);
  may_exist("official", c.paths.official);
  for (const auto& p : c.paths.stopwords) must_exist("stopwords", p);
  if (c.paths.output.empty()) bad.push_back("paths.output is required");

  if (c.topic.keywords.empty() && c.topic.hashtags.empty() && c.topic.tracked_user_ids.empty())
    bad.push_back("topic needs at least one keyword, hashtag or tracked user");
  if (c.topic.window_start >= c.topic.window_end) bad.push_back("topic.start must be before topic.end");

  if (!(c.filtering.iqr_multiplier > 0)) bad.push_back("filtering.iqr_multiplier must be positive");
  if (!(c.filtering.bot_threshold >= 0 && c.filtering.bot_threshold <= 100))
    bad.push_back("filtering.bot_threshold must lie in [0, 100]");

  if (!(c.demographics.radius_km > 0)) bad.push_back("demographics.radius_km must be positive");
  if (c.demographics.ngram_order < 1) bad.push_back("demographics.ngram_order must be at least 1");
  if (!(c.demographics.smoothing > 0)) bad.push_back("demographics.smoothing must be positive");

  try {
    c.embedding.validate();
  } catch (const ValidationError& e) {
    bad.push_back(std::string("embedding: ") + e.what());
  }

  if (!(c.training.ratio > 0 && c.training.ratio < 1)) bad.push_back("training.ratio must lie in (0, 1)");
  if (c.training.k_folds < 2) bad.push_back("training.k_folds must be at least 2");
  if (!(c.training.regularization > 0)) bad.push_back("training.regularization must be positive");
  if (c.training.epochs < 1) bad.push_back("training.epochs must be at least 1");
  if (c.training.relevance_per_class < 1) bad.push_back("training.relevance_per_class must be at least 1");
  if (c.training.polarity_per_class < 1) bad.push_back("training.polarity_per_class must be at least 1");

  if (c.report.top_k < 1) bad.push_back("report.top_k must be at least 1");
  return bad;
}

json path_or_null(const std::optional<fs::path>& p) { return p ? json(p->string()) : json(nullptr); }

std::ofstream open_out(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p.parent_path(), ec);
  if (ec) throw IoError("cannot create '" + p.parent_path().string() + "': " + ec.message());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write '" + p.string() + "'");
  return out;
}

void require(const fs::path& p, const char* producer) {
  if (!fs::exists(p))
    throw PreconditionError("missing upstream artifact '" + p.string() + "' (run the " + producer + " stage first)");
}

StopWords merged_stopwords(const PipelineConfig& c) {
  StopWords all;
  for (const auto& p : c.paths.stopwords) {
    auto s = load_stopwords(p);
    all.insert(s.begin(), s.end());
  }
  return all;
}

std::vector<std::string> analysis_users(const PipelineConfig& c, const Artifacts& a) {
  if (c.sampling.size) {
    require(a.sample(), "sample");
    return read_id_list(a.sample());
  }
  require(a.humans(), "filter");
  return read_id_list(a.humans());
}

std::unordered_map<std::string, std::vector<Tweet>> tweets_of(const fs::path& path,
                                                              const std::unordered_set<std::string>& users) {
  std::unordered_map<std::string, std::vector<Tweet>> out;
  TweetReader reader(path);
  while (auto t = reader.next())
    if (users.count(t->user_id)) out[t->user_id].push_back(std::move(*t));
  return out;
}

std::span<const Tweet> span_of(const std::unordered_map<std::string, std::vector<Tweet>>& m, const std::string& id) {
  auto it = m.find(id);
  if (it == m.end()) return {};
  return it->second;
}

void add_stats(StageSummary& s, const std::string& prefix, const LoadStats& st) {
  s.counts[prefix + "_lines"] = st.lines;
  s.counts[prefix + "_accepted"] = st.accepted;
  s.counts[prefix + "_malformed"] = st.malformed;
  s.counts[prefix + "_invalid"] = st.invalid;
  s.counts[prefix + "_duplicates"] = st.duplicates;
}

void check_partition(std::size_t input, std::size_t kept, std::size_t removed, const char* what) {
  if (input != kept + removed)
    throw std::logic_error(std::string(what) + ": kept + removed does not equal input");
}

// Stages --------------------------------------------------------------------

StageSummary ingest(const PipelineConfig& c, const Artifacts& a) {
  StageSummary s;
  auto loaded = load_users(c.paths.users, c.topic.window_end);
  add_stats(s, "users", loaded.stats);

  std::unordered_set<std::string> collected;
  std::size_t matched = 0, off_topic = 0, unknown_user = 0, retweets_excluded = 0;
  {
    auto out = open_out(a.tweets());
    TweetReader reader(c.paths.tweets, true);
    while (auto t = reader.next()) {
      if (!match_topic(*t, c.topic)) {
        ++off_topic;
      } else if (!loaded.catalog.find(t->user_id)) {
        ++unknown_user;
      } else if (c.ingest.exclude_retweets && t->is_retweet) {
        ++retweets_excluded;
      } else {
        ++matched;
        collected.insert(t->user_id);
        out << to_record(*t) << '\n';
      }
    }
    add_stats(s, "tweets", reader.stats());
  }
  {
    auto out = open_out(a.users());
    for (const auto& u : loaded.catalog.users())
      if (collected.count(u.user_id)) out << to_record(u) << '\n';
  }
  s.counts["tweets_on_topic"] = matched;
  s.counts["tweets_off_topic"] = off_topic;
  s.counts["tweets_unknown_user"] = unknown_user;
  s.counts["tweets_retweets_excluded"] = retweets_excluded;
  s.counts["users_collected"] = collected.size();
  s.outputs = {a.users(), a.tweets()};
  return s;
}

StageSummary filter(const PipelineConfig& c, const Artifacts& a) {
  require(a.users(), "ingest");
  require(a.tweets(), "ingest");
  StageSummary s;
  const auto loaded = load_users(a.users());
  const auto& users = loaded.catalog.users();
  const auto outliers = filter_outliers(users, c.reference_time(), c.filtering.iqr_multiplier);

  const bool need_tweets = !c.paths.bot_scores || c.filtering.fixture_miss == FixtureMissPolicy::fallback_heuristic;
  std::unordered_map<std::string, std::vector<Tweet>> tweets;
  if (need_tweets) tweets = tweets_of(a.tweets(), {outliers.kept.begin(), outliers.kept.end()});

  std::optional<FixtureBotScorer> fixture;
  HeuristicBotScorer heuristic;
  if (c.paths.bot_scores) fixture.emplace(FixtureBotScorer::load(*c.paths.bot_scores, c.filtering.fixture_miss));
  const BotScorer& scorer = fixture ? static_cast<const BotScorer&>(*fixture) : heuristic;

  std::unordered_map<std::string, BotScore> scores;
  for (const auto& id : outliers.kept)
    scores.emplace(id, score_bot(*loaded.catalog.find(id), span_of(tweets, id), scorer));
  const auto bots = filter_bots(outliers.kept, scores, c.filtering.bot_threshold);

  check_partition(users.size(), outliers.kept.size(), outliers.removed.size(), "outlier filter");
  check_partition(outliers.kept.size(), bots.humans.size(), bots.removed.size(), "bot filter");

  std::unordered_map<std::string, FilterVerdict> verdicts;
  for (const auto& v : outliers.removed) verdicts.emplace(v.user_id, v);
  for (std::size_t i = 0; i < outliers.kept.size(); ++i) {
    FilterVerdict v;
    v.user_id = outliers.kept[i];
    v.rate = outliers.kept_rates[i];
    v.bot = scores.at(v.user_id);
    verdicts.emplace(v.user_id, v);
  }
  for (const auto& v : bots.removed) verdicts.at(v.user_id).stage = FilterStage::bot_removed;
  std::vector<FilterVerdict> ordered;
  for (const auto& u : users) ordered.push_back(verdicts.at(u.user_id));
  {
    auto out = open_out(a.verdicts());
    write_verdicts_csv(out, ordered);
  }
  write_id_list(a.humans(), bots.humans);

  s.counts["collected"] = users.size();
  s.counts["outliers_removed"] = outliers.removed.size();
  s.counts["after_outliers"] = outliers.kept.size();
  s.counts["bots_removed"] = bots.removed.size();
  s.counts["after_bots"] = bots.humans.size();
  s.outputs = {a.verdicts(), a.humans()};
  log::info("IQR fence " + csv::fixed(outliers.bounds.upper, 4) + " posts/month; " +
            std::to_string(bots.humans.size()) + " of " + std::to_string(users.size()) + " users kept");
  return s;
}

StageSummary sample(const PipelineConfig& c, const Artifacts& a) {
  require(a.humans(), "filter");
  if (!c.sampling.size) throw PreconditionError("sampling.size is not set in the config");
  StageSummary s;
  const auto humans = read_id_list(a.humans());
  const auto chosen = sample_users(humans, *c.sampling.size, c.sampling.seed);
  write_id_list(a.sample(), chosen);
  s.counts["population"] = humans.size();
  s.counts["sampled"] = chosen.size();
  s.outputs = {a.sample()};
  return s;
}

StageSummary demographics(const PipelineConfig& c, const Artifacts& a) {
  require(a.users(), "ingest");
  require(a.tweets(), "ingest");
  const auto ids = analysis_users(c, a);
  StageSummary s;
  const auto loaded = load_users(a.users());
  const auto tweets = tweets_of(a.tweets(), {ids.begin(), ids.end()});

  const FixtureFaceClient faces = c.paths.faces ? FixtureFaceClient::load(*c.paths.faces) : FixtureFaceClient{};
  const NameGenderTable names = c.paths.name_gender ? NameGenderTable::load(*c.paths.name_gender) : NameGenderTable{};
  std::optional<NameEthnicityModel> ethnicity;
  if (c.paths.labeled_names) {
    const auto examples = load_labeled_names(*c.paths.labeled_names);
    ethnicity.emplace(train_name_classifier(examples, c.demographics.ngram_order, c.demographics.smoothing));
  }
  const auto gazetteer = Gazetteer::load(c.paths.gazetteer);
  const DemographicSources sources{faces, names, ethnicity ? &*ethnicity : nullptr, gazetteer,
                                   c.demographics.radius_km};

  std::vector<DemographicRecord> records;
  std::size_t gender = 0, age = 0, eth = 0, location = 0;
  for (const auto& id : ids) {
    const auto* user = loaded.catalog.find(id);
    if (!user) throw PreconditionError("user '" + id + "' is not in " + a.users().string());
    records.push_back(extract_demographics(*user, span_of(tweets, id), sources));
    const auto& r = records.back();
    gender += r.gender.value != Gender::unknown;
    age += r.age.bucket != AgeBucket::unknown;
    eth += r.ethnicity.assigned();
    location += r.location.country.has_value();
  }
  {
    auto out = open_out(a.demographics());
    write_demographics_csv(out, records);
  }
  s.counts["users"] = records.size();
  s.counts["gender_identified"] = gender;
  s.counts["age_identified"] = age;
  s.counts["ethnicity_identified"] = eth;
  s.counts["location_identified"] = location;
  s.outputs = {a.demographics()};
  return s;
}

StageSummary train_embedding_stage(const PipelineConfig& c, const Artifacts& a) {
  require(a.humans(), "filter");
  require(a.tweets(), "ingest");
  StageSummary s;
  const auto humans = read_id_list(a.humans());
  const std::unordered_set<std::string> keep(humans.begin(), humans.end());
  const auto stopwords = merged_stopwords(c);
  std::vector<TokenizedText> corpus;
  TweetReader reader(a.tweets());
  while (auto t = reader.next())
    if (keep.count(t->user_id)) corpus.push_back(preprocess(t->text, stopwords));
  const auto model = train_embedding(corpus, c.embedding);
  fs::create_directories(a.embedding().parent_path());
  model.save(a.embedding());
  s.counts["tweets"] = corpus.size();
  s.counts["vocabulary"] = model.size();
  s.outputs = {a.embedding()};
  return s;
}

const char* const kModelNames[3] = {"relevance", "positive", "negative"};

StageSummary train_predictors(const PipelineConfig& c, const Artifacts& a) {
  require(a.embedding(), "train_embedding");
  StageSummary s;
  const auto embedding = EmbeddingModel::load(a.embedding());
  const auto labeled = load_labeled_tweets(c.paths.labeled_tweets);
  const auto data = compose_predictor_datasets(
      labeled, merged_stopwords(c), TrainingSetSizes{c.training.relevance_per_class, c.training.polarity_per_class},
      c.training.seed);
  SuiteTrainingConfig cfg;
  cfg.train_ratio = c.training.ratio;
  cfg.k_folds = c.training.k_folds;
  cfg.trainer = TrainerConfig{c.training.regularization, c.training.epochs, c.training.seed};
  const auto trained = train_predictor_suite(data, embedding, cfg);

  const LinearModel* models[3] = {&trained.suite.relevance, &trained.suite.positive, &trained.suite.negative};
  fs::create_directories(a.metrics().parent_path());
  for (int i = 0; i < 3; ++i) {
    models[i]->save(a.model(kModelNames[i]));
    s.outputs.push_back(a.model(kModelNames[i]));
  }
  {
    auto out = open_out(a.metrics());
    write_predictor_metrics_csv(out, trained.reports);
  }
  s.outputs.push_back(a.metrics());
  for (const auto& r : trained.reports) {
    s.counts[r.name + "_train"] = r.n_train;
    s.counts[r.name + "_test"] = r.n_test;
    s.counts[r.name + "_dropped"] = r.dropped;
    log::info(r.name + ": cv accuracy " + csv::fixed(r.cv.mean.accuracy, 4) + ", test accuracy " +
              csv::fixed(r.test.accuracy, 4));
  }
  return s;
}

StageSummary classify(const PipelineConfig& c, const Artifacts& a) {
  for (const char* name : kModelNames) require(a.model(name), "train_predictors");
  require(a.embedding(), "train_embedding");
  require(a.tweets(), "ingest");
  const auto ids = analysis_users(c, a);
  StageSummary s;
  const auto embedding = EmbeddingModel::load(a.embedding());
  PredictorSuite suite{LinearModel::load(a.model("relevance")), LinearModel::load(a.model("positive")),
                       LinearModel::load(a.model("negative"))};
  suite.validate(static_cast<std::size_t>(embedding.dimension()));
  const auto stopwords = merged_stopwords(c);

  const std::unordered_set<std::string> keep(ids.begin(), ids.end());
  std::unordered_map<std::string, std::vector<TweetPolarity>> per_user;
  std::map<std::string, std::size_t> tweet_counts;
  {
    auto out = open_out(a.tweet_polarity());
    csv::write_row(out, {"tweet_id", "user_id", "polarity"});
    TweetReader reader(a.tweets());
    while (auto t = reader.next()) {
      if (!keep.count(t->user_id)) continue;
      const auto p = classify_tweet(suite, embedding, *t, stopwords);
      per_user[t->user_id].push_back(p);
      ++tweet_counts[std::string("tweets_") + to_string(p)];
      csv::write_row(out, {t->tweet_id, t->user_id, to_string(p)});
    }
  }
  {
    auto out = open_out(a.user_polarity());
    csv::write_row(out, {"user_id", "value", "n_pos", "n_neg", "n_neu"});
    for (const auto& id : ids) {
      auto it = per_user.find(id);
      const auto up = it == per_user.end() ? UserPolarity{} : user_polarity(it->second);
      ++tweet_counts[std::string("users_") + to_string(up.value)];
      csv::write_row(out, {id, to_string(up.value), std::to_string(up.n_pos), std::to_string(up.n_neg),
                           std::to_string(up.n_neu)});
    }
  }
  s.counts.insert(tweet_counts.begin(), tweet_counts.end());
  s.counts["users"] = ids.size();
  s.outputs = {a.tweet_polarity(), a.user_polarity()};
  return s;
}

FilteringCounts read_filtering_counts(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  FilteringCounts f;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    if (++lineno == 1 || trim(line).empty()) continue;
    auto row = csv::parse_line(line);
    if (!row || row->size() < 2) throw ParseError(path.string(), lineno, "malformed verdict row");
    const auto& stage = (*row)[1];
    ++f.collected;
    if (stage == "kept") {
      ++f.after_outliers;
      ++f.after_bots;
    } else if (stage == "bot_removed") {
      ++f.after_outliers;
    } else if (stage != "outlier_removed") {
      throw ParseError(path.string(), lineno, "unknown stage '" + stage + "'");
    }
  }
  return f;
}

StageSummary report(const PipelineConfig& c, const Artifacts& a) {
  require(a.user_polarity(), "classify");
  require(a.demographics(), "demographics");
  require(a.verdicts(), "filter");
  require(a.metrics(), "train_predictors");
  StageSummary s;

  std::unordered_map<std::string, DemographicRecord> demo;
  for (auto& r : read_demographics_csv(a.demographics())) demo.emplace(r.user_id, std::move(r));
  std::vector<AnnotatedUser> users;
  std::vector<UserPolarity::Value> values;
  for (const auto& [id, up] : read_user_polarity(a.user_polarity())) {
    AnnotatedUser u;
    u.user_id = id;
    u.polarity = up.value;
    if (auto it = demo.find(id); it != demo.end()) u.demographics = it->second;
    else u.demographics.user_id = id;
    users.push_back(std::move(u));
    values.push_back(up.value);
  }

  ReportBundle b;
  b.filtering = read_filtering_counts(a.verdicts());
  b.predictors = read_predictor_metrics_csv(a.metrics());
  b.distribution = polarity_distribution(values);
  for (auto d : {BreakdownDimension::gender, BreakdownDimension::age_bucket, BreakdownDimension::ethnicity,
                 BreakdownDimension::country, BreakdownDimension::region, BreakdownDimension::city})
    b.breakdowns.push_back(breakdown(users, d, c.report.top_k));
  for (auto d : {BreakdownDimension::country, BreakdownDimension::region, BreakdownDimension::city})
    b.yes_shares.emplace_back(d, yes_shares_by_location(users, d));
  if (c.paths.official) {
    const auto official = load_official_results(*c.paths.official);
    std::vector<YesShareRow> all;
    for (const auto& [level, rows] : b.yes_shares) all.insert(all.end(), rows.begin(), rows.end());
    b.comparison = compare_official(all, official);
  }
  s.outputs = emit(b, a.report_dir(), c.report.format);
  s.counts["users"] = users.size();
  s.counts["polarized"] = b.distribution.n_polarized;
  s.counts["official_matched"] = b.comparison.matched.size();
  return s;
}

}  // namespace

void PipelineConfig::override_seed(std::uint64_t seed) {
  embedding.seed = seed;
  training.seed = seed;
  sampling.seed = seed;
}

PipelineConfig parse_config(const json& doc, const fs::path& base) {
  std::vector<std::string> bad;
  PipelineConfig c;
  if (!doc.is_object()) throw ConfigError({"config must be an object"});
  for (const auto& [k, v] : doc.items()) {
    static const std::set<std::string> sections = {"paths",     "topic",    "ingest", "filtering", "demographics",
                                                   "embedding", "training", "report", "sampling"};
    if (!sections.count(k)) bad.push_back("unknown section " + k);
  }

  Section paths(doc, "paths", bad);
  paths.allow({"users", "tweets", "bot_scores", "faces", "name_gender", "labeled_names", "labeled_tweets", "gazetteer",
               "official", "stopwords", "output"});
  paths.get_path("users", c.paths.users, base);
  paths.get_path("tweets", c.paths.tweets, base);
  paths.get_path("bot_scores", c.paths.bot_scores, base);
  paths.get_path("faces", c.paths.faces, base);
  paths.get_path("name_gender", c.paths.name_gender, base);
  paths.get_path("labeled_names", c.paths.labeled_names, base);
  paths.get_path("labeled_tweets", c.paths.labeled_tweets, base);
  paths.get_path("gazetteer", c.paths.gazetteer, base);
  paths.get_path("official", c.paths.official, base);
  paths.get_path("output", c.paths.output, base);
  std::vector<std::string> stop;
  paths.get("stopwords", stop);
  for (const auto& s : stop) c.paths.stopwords.push_back(base / s);

  Section topic(doc, "topic", bad);
  topic.allow({"keywords", "hashtags", "tracked_user_ids", "start", "end"});
  std::vector<std::string> keywords, hashtags, tracked;
  std::optional<Timestamp> start, end;
  topic.get("keywords", keywords);
  topic.get("hashtags", hashtags);
  topic.get("tracked_user_ids", tracked);
  topic.get_time("start", start);
  topic.get_time("end", end);
  if (!start || !end) {
    bad.push_back("topic.start and topic.end are required");
  } else {
    try {
      c.topic = TopicConfig::make(keywords, hashtags, tracked, *start, *end);
    } catch (const ValidationError& e) {
      bad.push_back(std::string("topic: ") + e.what());
    }
  }

  Section ingest(doc, "ingest", bad);
  ingest.allow({"exclude_retweets"});
  ingest.get("exclude_retweets", c.ingest.exclude_retweets);

  Section filtering(doc, "filtering", bad);
  filtering.allow({"iqr_multiplier", "bot_threshold", "reference_time", "fixture_miss"});
  filtering.get("iqr_multiplier", c.filtering.iqr_multiplier);
  filtering.get("bot_threshold", c.filtering.bot_threshold);
  filtering.get_time("reference_time", c.filtering.reference_time);
  std::string miss = "error";
  filtering.get("fixture_miss", miss);
  if (miss == "fallback_heuristic") c.filtering.fixture_miss = FixtureMissPolicy::fallback_heuristic;
  else if (miss != "error") bad.push_back("filtering.fixture_miss must be \"error\" or \"fallback_heuristic\"");

  Section demo(doc, "demographics", bad);
  demo.allow({"radius_km", "ngram_order", "smoothing"});
  demo.get("radius_km", c.demographics.radius_km);
  demo.get("ngram_order", c.demographics.ngram_order);
  demo.get("smoothing", c.demographics.smoothing);

  Section emb(doc, "embedding", bad);
  emb.allow({"dimension", "window", "negative_samples", "epochs", "initial_learning_rate", "min_count", "seed"});
  emb.get("dimension", c.embedding.dimension);
  emb.get("window", c.embedding.window);
  emb.get("negative_samples", c.embedding.negative_samples);
  emb.get("epochs", c.embedding.epochs);
  emb.get("initial_learning_rate", c.embedding.initial_learning_rate);
  emb.get("min_count", c.embedding.min_count);
  emb.get("seed", c.embedding.seed);

  Section train(doc, "training", bad);
  train.allow({"ratio", "k_folds", "regularization", "epochs", "relevance_per_class", "polarity_per_class", "seed"});
  train.get("ratio", c.training.ratio);
  train.get("k_folds", c.training.k_folds);
  train.get("regularization", c.training.regularization);
  train.get("epochs", c.training.epochs);
  train.get("relevance_per_class", c.training.relevance_per_class);
  train.get("polarity_per_class", c.training.polarity_per_class);
  train.get("seed", c.training.seed);

  Section rep(doc, "report", bad);
  rep.allow({"top_k", "format"});
  rep.get("top_k", c.report.top_k);
  std::string format = "csv";
  rep.get("format", format);
  if (format == "structured_text") c.report.format = ReportFormat::structured_text;
  else if (format != "csv") bad.push_back("report.format must be \"csv\" or \"structured_text\"");

  Section samp(doc, "sampling", bad);
  samp.allow({"size", "seed"});
  std::size_t size = 0;
  bool has_size = doc.contains("sampling") && doc["sampling"].is_object() && doc["sampling"].contains("size") &&
                  !doc["sampling"]["size"].is_null();
  samp.get("size", size);
  if (has_size) c.sampling.size = size;
  samp.get("seed", c.sampling.seed);

  if (bad.empty()) {
    auto more = violations(c);
    bad.insert(bad.end(), more.begin(), more.end());
  }
  if (!bad.empty()) throw ConfigError(bad);
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError({path.string() + ": " + e.what()});
  }
  return parse_config(doc, path.parent_path());
}

void validate(const PipelineConfig& config) {
  auto bad = violations(config);
  if (!bad.empty()) throw ConfigError(bad);
}

json to_json(const PipelineConfig& c) {
  json stop = json::array();
  for (const auto& p : c.paths.stopwords) stop.push_back(p.string());
  return json{
      {"paths",
       {{"users", c.paths.users.string()},
        {"tweets", c.paths.tweets.string()},
        {"bot_scores", path_or_null(c.paths.bot_scores)},
        {"faces", path_or_null(c.paths.faces)},
        {"name_gender", path_or_null(c.paths.name_gender)},
        {"labeled_names", path_or_null(c.paths.labeled_names)},
        {"labeled_tweets", c.paths.labeled_tweets.string()},
        {"gazetteer", c.paths.gazetteer.string()},
        {"official", path_or_null(c.paths.official)},
        {"stopwords", stop},
        {"output", c.paths.output.string()}}},
      {"topic",
       {{"keywords", c.topic.keywords},
        {"hashtags", c.topic.hashtags},
        {"tracked_user_ids", c.topic.tracked_user_ids},
        {"start", format_timestamp(c.topic.window_start)},
        {"end", format_timestamp(c.topic.window_end)}}},
      {"ingest", {{"exclude_retweets", c.ingest.exclude_retweets}}},
      {"filtering",
       {{"iqr_multiplier", c.filtering.iqr_multiplier},
        {"bot_threshold", c.filtering.bot_threshold},
        {"reference_time", format_timestamp(c.reference_time())},
        {"fixture_miss",
         c.filtering.fixture_miss == FixtureMissPolicy::error ? "error" : "fallback_heuristic"}}},
      {"demographics",
       {{"radius_km", c.demographics.radius_km},
        {"ngram_order", c.demographics.ngram_order},
        {"smoothing", c.demographics.smoothing}}},
      {"embedding",
       {{"dimension", c.embedding.dimension},
        {"window", c.embedding.window},
        {"negative_samples", c.embedding.negative_samples},
        {"epochs", c.embedding.epochs},
        {"initial_learning_rate", c.embedding.initial_learning_rate},
        {"min_count", c.embedding.min_count},
        {"seed", c.embedding.seed}}},
      {"training",
       {{"ratio", c.training.ratio},
        {"k_folds", c.training.k_folds},
        {"regularization", c.training.regularization},
        {"epochs", c.training.epochs},
        {"relevance_per_class", c.training.relevance_per_class},
        {"polarity_per_class", c.training.polarity_per_class},
        {"seed", c.training.seed}}},
      {"report",
       {{"top_k", c.report.top_k}, {"format", c.report.format == ReportFormat::csv ? "csv" : "structured_text"}}},
      {"sampling",
       {{"size", c.sampling.size ? json(*c.sampling.size) : json(nullptr)}, {"seed", c.sampling.seed}}},
  };
}

const char* to_string(Stage s) {
  switch (s) {
    case Stage::ingest: return "ingest";
    case Stage::filter: return "filter";
    case Stage::sample: return "sample";
    case Stage::demographics: return "demographics";
    case Stage::train_embedding: return "train_embedding";
    case Stage::train_predictors: return "train_predictors";
    case Stage::classify: return "classify";
    case Stage::report: return "report";
  }
  return "?";
}

std::vector<Stage> all_stages(const PipelineConfig& config) {
  std::vector<Stage> out = {Stage::ingest, Stage::filter};
  if (config.sampling.size) out.push_back(Stage::sample);
  for (auto s : {Stage::demographics, Stage::train_embedding, Stage::train_predictors, Stage::classify, Stage::report})
    out.push_back(s);
  return out;
}

StageSummary run_stage(Stage stage, const PipelineConfig& config) {
  const Artifacts a(config.paths.output);
  const auto t0 = std::chrono::steady_clock::now();
  log::info(std::string("stage ") + to_string(stage));
  StageSummary s;
  switch (stage) {
    case Stage::ingest: s = ingest(config, a); break;
    case Stage::filter: s = filter(config, a); break;
    case Stage::sample: s = sample(config, a); break;
    case Stage::demographics: s = demographics(config, a); break;
    case Stage::train_embedding: s = train_embedding_stage(config, a); break;
    case Stage::train_predictors: s = train_predictors(config, a); break;
    case Stage::classify: s = classify(config, a); break;
    case Stage::report: s = report(config, a); break;
  }
  s.stage = stage;
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return s;
}

OutputLock::OutputLock(const fs::path& output_dir) : path_(output_dir / ".lock") {
  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec) throw IoError("cannot create '" + output_dir.string() + "': " + ec.message());
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (!f)
    throw PreconditionError("output directory is locked by another run (" + path_.string() +
                            "); remove the file if no run is active");
  std::fprintf(f, "%ld\n", static_cast<long>(::getpid()));
  std::fclose(f);
}

OutputLock::~OutputLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

void write_manifest(const PipelineConfig& config, const std::vector<StageSummary>& summaries) {
  const Artifacts a(config.paths.output);
  json m;
  if (fs::exists(a.manifest())) {
    std::ifstream in(a.manifest());
    m = json::parse(in, nullptr, false);
    if (m.is_discarded() || !m.is_object()) m = json::object();
  }
  m["tool_version"] = tool_version();
  m["config"] = to_json(config);
  for (const auto& s : summaries) {
    json outputs = json::array();
    for (const auto& p : s.outputs) outputs.push_back(p.string());
    m["stages"][to_string(s.stage)] = {{"counts", s.counts}, {"seconds", s.seconds}, {"outputs", outputs}};
  }
  auto out = open_out(a.manifest());
  out << m.dump(2) << '\n';
}

std::vector<std::string> sample_users(const std::vector<std::string>& users, std::size_t n, std::uint64_t seed) {
  if (n > users.size())
    throw ValidationError("cannot sample " + std::to_string(n) + " users from " + std::to_string(users.size()));
  std::vector<std::size_t> idx(users.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  std::vector<std::string> out;
  out.reserve(n);
  for (auto i : idx) out.push_back(users[i]);
  return out;
}

std::vector<std::string> read_id_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

void write_id_list(const fs::path& path, const std::vector<std::string>& ids) {
  auto out = open_out(path);
  for (const auto& id : ids) out << id << '\n';
}

std::vector<std::pair<std::string, UserPolarity>> read_user_polarity(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::pair<std::string, UserPolarity>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    if (++lineno == 1 || trim(line).empty()) continue;
    auto f = csv::parse_line(line);
    if (!f || f->size() != 5) throw ParseError(path.string(), lineno, "expected 5 columns");
    UserPolarity up;
    try {
      up.value = parse_user_polarity((*f)[1]);
      up.n_pos = std::stoul((*f)[2]);
      up.n_neg = std::stoul((*f)[3]);
      up.n_neu = std::stoul((*f)[4]);
    } catch (const std::exception& e) {
      throw ParseError(path.string(), lineno, e.what());
    }
    out.emplace_back((*f)[0], up);
  }
  return out;
}

json corpus_config(const TopicConfig& topic, const std::string& output) {
  return json{
      {"paths",
       {{"users", "users.jsonl"},
        {"tweets", "tweets.jsonl"},
        {"bot_scores", "bot_scores.jsonl"},
        {"faces", "faces.jsonl"},
        {"name_gender", "name_gender.csv"},
        {"labeled_names", "labeled_names.csv"},
        {"labeled_tweets", "labeled_tweets.jsonl"},
        {"gazetteer", "gazetteer.csv"},
        {"official", "official.csv"},
        {"stopwords", {"stopwords.txt"}},
        {"output", output}}},
      {"topic",
       {{"keywords", topic.keywords},
        {"hashtags", topic.hashtags},
        {"tracked_user_ids", topic.tracked_user_ids},
        {"start", format_timestamp(topic.window_start)},
        {"end", format_timestamp(topic.window_end)}}},
      {"filtering", {{"iqr_multiplier", 1.5}, {"bot_threshold", 40}}},
      {"training", {{"ratio", 0.8}, {"k_folds", 10}}},
      {"report", {{"top_k", 5}, {"format", "csv"}}},
  };
}

const char* tool_version() { return STANCEPIPE_VERSION; }

}  // namespace stancepipe
