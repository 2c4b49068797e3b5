// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <unordered_map>
#include <vector>

#include "stancepipe/csv.hpp"
#include "stancepipe/demographics.hpp"
#include "stancepipe/embedding.hpp"
#include "stancepipe/filtering.hpp"
#include "stancepipe/log.hpp"
#include "stancepipe/pipeline.hpp"
#include "stancepipe/polarity.hpp"
#include "stancepipe/report.hpp"
#include "stancepipe/rng.hpp"
#include "stancepipe/synthgen.hpp"
#include "stancepipe/training.hpp"

namespace fs = std::filesystem;
using namespace stancepipe;
using V = UserPolarity::Value;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v, int decimals = 4) { return csv::fixed(v, decimals); }

fs::path scratch_root() {
  static const fs::path root = fs::temp_directory_path() / ("stancepipe_acceptance_" + std::to_string(::getpid()));
  return root;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(STANCEPIPE_CLI) + " --log-level error " + args;
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 1 ------------------------------------------------------------------------

Outcome combine_truth_table() {
  struct Row {
    bool relevant, pos, neg;
    TweetPolarity expected;
  };
  const Row table[] = {
      {false, false, false, TweetPolarity::irrelevant}, {false, false, true, TweetPolarity::irrelevant},
      {false, true, false, TweetPolarity::irrelevant},  {false, true, true, TweetPolarity::irrelevant},
      {true, false, false, TweetPolarity::neutral},     {true, false, true, TweetPolarity::negative},
      {true, true, false, TweetPolarity::positive},     {true, true, true, TweetPolarity::discarded},
  };
  int ok = 0;
  for (const auto& r : table) ok += combine(r.relevant, r.pos, r.neg) == r.expected;
  return {ok == 8, std::to_string(ok) + "/8 triples"};
}

// 2 ------------------------------------------------------------------------

Outcome filtering_recovery() {
  SynthSpec spec;
  spec.n_users = 10000;
  spec.bot_fraction = 0.3;
  spec.outlier_fraction = 0.12;
  spec.labeled_positive = spec.labeled_negative = spec.labeled_neutral = spec.labeled_non_relevant = 10;
  const auto corpus = generate(spec);

  const auto outliers = filter_outliers(corpus.users, corpus.topic.window_end, 1.5);
  std::set<std::string> removed_outliers;
  for (const auto& v : outliers.removed) removed_outliers.insert(v.user_id);

  std::unordered_map<std::string, double> recorded(corpus.bot_scores.begin(), corpus.bot_scores.end());
  const FixtureBotScorer scorer(recorded, FixtureMissPolicy::error);
  std::unordered_map<std::string, BotScore> scores;
  std::unordered_map<std::string, const UserProfile*> by_id;
  for (const auto& u : corpus.users) by_id[u.user_id] = &u;
  for (const auto& id : outliers.kept) scores[id] = score_bot(*by_id[id], {}, scorer);
  const auto bots = filter_bots(outliers.kept, scores, 40);
  std::set<std::string> removed_bots;
  for (const auto& v : bots.removed) removed_bots.insert(v.user_id);

  std::size_t injected = 0, caught = 0, clean = 0, false_pos = 0;
  std::size_t bot_errors = 0;
  for (const auto& t : corpus.user_truth) {
    const bool out = removed_outliers.count(t.user_id) > 0;
    if (t.is_outlier) {
      ++injected;
      caught += out;
    } else {
      ++clean;
      false_pos += out;
    }
    if (!out && (removed_bots.count(t.user_id) > 0) != t.is_bot) ++bot_errors;
  }
  const bool partition = outliers.kept.size() + outliers.removed.size() == corpus.users.size() &&
                         bots.humans.size() + bots.removed.size() == outliers.kept.size();
  const double recall = static_cast<double>(caught) / static_cast<double>(injected);
  const double fp_rate = static_cast<double>(false_pos) / static_cast<double>(clean);
  return {recall >= 0.95 && fp_rate <= 0.02 && bot_errors == 0 && partition,
          "outliers removed " + num(100 * recall, 2) + "%, false positives " + num(100 * fp_rate, 2) +
              "%, bot errors " + std::to_string(bot_errors) + ", partition " + (partition ? "holds" : "broken")};
}

// 3 ------------------------------------------------------------------------

double oracle_percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  if (v.size() == 1) return v[0];
  const double h = (static_cast<double>(v.size()) - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

Outcome quartile_oracle() {
  Rng rng(3);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> v(1 + rng.below(500));
    const int shape = static_cast<int>(rng.below(3));
    for (auto& x : v) {
      if (shape == 0) x = rng.uniform(0, 100);
      else if (shape == 1) x = static_cast<double>(rng.below(10));
      else x = std::exp(rng.uniform(-3, 6));
    }
    const double m = rng.uniform(0.5, 3);
    const auto b = iqr_bounds(v, m);
    const double q1 = oracle_percentile(v, 0.25), q3 = oracle_percentile(v, 0.75);
    worst = std::max({worst, std::abs(b.q1 - q1), std::abs(b.q3 - q3), std::abs(b.upper - (q3 + m * (q3 - q1)))});
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", worst);
  return {worst <= 1e-12, std::string("max deviation ") + buf + " over 1000 multisets"};
}

// 4 ------------------------------------------------------------------------

Outcome metrics_oracle() {
  Rng rng(4);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(200);
    LinearModel model;
    model.weights = {1.0};
    std::vector<LabeledVector> test;
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool predicted = rng.bernoulli(0.5), truth = rng.bernoulli(0.5);
      test.push_back({{predicted ? 1.0 : -1.0}, truth});
      if (predicted && truth) ++tp;
      else if (predicted) ++fp;
      else if (truth) ++fn;
      else ++tn;
    }
    const double p = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double r = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    const double acc = static_cast<double>(tp + tn) / static_cast<double>(n);
    const auto m = evaluate(model, test);
    if (m.precision != p || m.recall != r || m.f_score != f || m.accuracy != acc) ++mismatches;
  }
  LinearModel all_pos;
  all_pos.weights = {0.0};
  all_pos.bias = 1;
  const std::vector<LabeledVector> half = {{{0.0}, true}, {{0.0}, false}, {{0.0}, true}, {{0.0}, false}};
  const auto c = evaluate(all_pos, half);
  const bool closed = c.precision == 0.5 && c.recall == 1.0 && c.f_score == 2.0 / 3.0 && c.accuracy == 0.5;
  return {mismatches == 0 && closed, std::to_string(mismatches) + " mismatches in 1000 vectors, closed form " +
                                         (closed ? "exact" : "wrong")};
}

// 5 ------------------------------------------------------------------------

// Sentences are drawn from 20 topics with their own words plus a shared
// background. Planted pair k ("pa<k>", "pb<k>") always appears adjacent in
// topic-k sentences; "rc<k>" is dropped into sentences of any topic.
Outcome embedding_separation() {
  Rng rng(5);
  const int topics = 20;
  std::vector<TokenizedText> corpus;
  for (int s = 0; s < 5000; ++s) {
    TokenizedText t;
    const auto topic = std::to_string(rng.below(topics));
    const std::size_t len = 8 + rng.below(5);
    for (std::size_t i = 0; i < len; ++i)
      t.tokens.push_back(rng.bernoulli(0.8) ? "t" + topic + "w" + std::to_string(rng.below(25))
                                            : "bg" + std::to_string(rng.below(100)));
    if (rng.bernoulli(0.5)) {
      const auto at = static_cast<long>(rng.below(t.tokens.size()));
      t.tokens.insert(t.tokens.begin() + at, {"pa" + topic, "pb" + topic});
    }
    if (rng.bernoulli(0.5)) {
      const auto at = static_cast<long>(rng.below(t.tokens.size()));
      t.tokens.insert(t.tokens.begin() + at, "rc" + std::to_string(rng.below(topics)));
    }
    corpus.push_back(std::move(t));
  }
  const int pairs = topics;
  EmbeddingParams params;
  params.seed = 11;
  const auto start = std::chrono::steady_clock::now();
  const auto a = train_embedding(corpus, params);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto b = train_embedding(corpus, params);
  const bool identical = a.raw().size() == b.raw().size() && std::equal(a.raw().begin(), a.raw().end(), b.raw().begin());

  auto vec = [&](const std::string& w) { return a.vector(*a.index_of(w)); };
  double planted = 0, random_contexts = 0;
  for (int k = 0; k < pairs; ++k) {
    planted += cosine(vec("pa" + std::to_string(k)), vec("pb" + std::to_string(k)));
    random_contexts += cosine(vec("pa" + std::to_string(k)), vec("rc" + std::to_string(k)));
  }
  planted /= pairs;
  random_contexts /= pairs;
  double random_pairs = 0;
  const int n_random = 2000;
  for (int i = 0; i < n_random; ++i) {
    const auto x = rng.below(a.size());
    auto y = rng.below(a.size());
    while (y == x) y = rng.below(a.size());
    random_pairs += cosine(a.vector(x), a.vector(y));
  }
  random_pairs /= n_random;
  const double gap = planted - random_pairs;
  return {gap >= 0.2 && planted > random_contexts + 0.2 && identical && seconds < 60,
          "planted " + num(planted) + ", random pairs " + num(random_pairs) + ", random contexts " +
              num(random_contexts) + ", bitwise " + (identical ? "identical" : "different") + ", " +
              num(seconds, 2) + " s per run"};
}

// 6 ------------------------------------------------------------------------

Outcome predictor_quality() {
  SynthSpec spec;
  spec.n_users = 2000;
  const auto corpus = generate(spec);
  const StopWords stop(corpus.stopwords.begin(), corpus.stopwords.end());
  std::unordered_map<std::string, bool> human;
  for (const auto& t : corpus.user_truth) human[t.user_id] = !t.is_bot && !t.is_outlier;
  std::vector<TokenizedText> texts;
  for (const auto& t : corpus.tweets)
    if (human[t.user_id]) texts.push_back(preprocess(t.text, stop));
  const auto embedding = train_embedding(texts, EmbeddingParams{});
  const auto data = compose_predictor_datasets(corpus.labeled_tweets, stop, TrainingSetSizes{1000, 500}, 1);
  const auto trained = train_predictor_suite(data, embedding, SuiteTrainingConfig{});
  const auto& r = trained.reports;
  const bool pass = r[0].cv.mean.accuracy >= 0.95 && r[1].cv.mean.accuracy >= 0.90 && r[2].cv.mean.accuracy >= 0.90 &&
                    r[0].cv.folds.size() == 10;
  std::string detail;
  for (const auto& x : r)
    detail += x.name + " " + num(x.cv.mean.accuracy) + " (n=" + std::to_string(x.n_train + x.n_test) + ") ";
  return {pass, "10-fold cv accuracy: " + detail};
}

// 7 and 9 share generated corpora ------------------------------------------

struct EndToEnd {
  fs::path corpus;
  int status_first = -1;
  int status_second = -1;
};

const EndToEnd& end_to_end() {
  static EndToEnd e2e = [] {
    EndToEnd e;
    e.corpus = scratch_root() / "e2e";
    fs::remove_all(e.corpus);
    const std::string seed = " --seed 42 ";
    if (run_cli("--output " + e.corpus.string() + seed + "synth --users 5000") != 0) return e;
    const std::string cfg = "--config " + (e.corpus / "pipeline.json").string();
    e.status_first = run_cli(cfg + seed + "--output " + (e.corpus / "run1").string() + " run all");
    e.status_second = run_cli(cfg + seed + "--output " + (e.corpus / "run2").string() + " run all");
    return e;
  }();
  return e2e;
}

Outcome end_to_end_recovery() {
  const auto& e = end_to_end();
  if (e.status_first != 0) return {false, "run all exited with " + std::to_string(e.status_first)};
  const Artifacts art(e.corpus / "run1");
  const auto truth = load_user_truth(e.corpus / CorpusFiles::truth_users);
  std::unordered_map<std::string, const UserTruth*> by_id;
  for (const auto& t : truth) by_id[t.user_id] = &t;

  const auto predicted = read_user_polarity(art.user_polarity());
  std::map<V, double> pred_share, truth_share;
  std::map<std::string, std::pair<std::size_t, std::size_t>> truth_region;  // pos, neg
  std::map<std::string, std::size_t> region_polarized;
  for (const auto& [id, p] : predicted) {
    const auto* t = by_id.at(id);
    pred_share[p.value] += 1;
    truth_share[t->polarity] += 1;
    region_polarized[t->home.region] += 1;
    if (t->polarity == V::positive) ++truth_region[t->home.region].first;
    if (t->polarity == V::negative) ++truth_region[t->home.region].second;
  }
  const double n = static_cast<double>(predicted.size());
  double worst_class = 0;
  std::string detail = std::to_string(predicted.size()) + " users;";
  for (V v : {V::positive, V::negative, V::neutral}) {
    const double diff = 100 * std::abs(pred_share[v] - truth_share[v]) / n;
    worst_class = std::max(worst_class, diff);
    detail += std::string(" ") + to_string(v) + " " + num(100 * pred_share[v] / n, 1) + "% vs " +
              num(100 * truth_share[v] / n, 1) + "%";
  }

  std::map<std::string, double> predicted_yes;
  std::ifstream in(art.report_dir() / "yes_share_region.csv");
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto f = csv::parse_line(line);
    if (f && f->size() == 4) predicted_yes[(*f)[0]] = std::stod((*f)[3]);
  }
  double worst_region = 0;
  std::size_t checked = 0;
  for (const auto& [region, count] : region_polarized) {
    if (count < 100) continue;
    const auto [pos, neg] = truth_region[region];
    if (pos + neg == 0) continue;
    const double truth_yes = 100.0 * static_cast<double>(pos) / static_cast<double>(pos + neg);
    auto it = predicted_yes.find(region);
    const double diff = it == predicted_yes.end() ? 100.0 : std::abs(it->second - truth_yes);
    worst_region = std::max(worst_region, diff);
    ++checked;
    detail += "; " + region + " " + (it == predicted_yes.end() ? std::string("missing") : num(it->second, 2)) +
              " vs " + num(truth_yes, 2);
  }
  return {worst_class <= 5 && worst_region <= 5 && checked > 0,
          "worst class gap " + num(worst_class, 2) + " pts, worst region gap " + num(worst_region, 2) + " pts over " +
              std::to_string(checked) + " regions; " + detail};
}

Outcome determinism() {
  const auto& e = end_to_end();
  if (e.status_first != 0 || e.status_second != 0)
    return {false, "run all exited with " + std::to_string(e.status_first) + "/" + std::to_string(e.status_second)};
  const auto a = Artifacts(e.corpus / "run1").report_dir();
  const auto b = Artifacts(e.corpus / "run2").report_dir();
  std::size_t files = 0, differing = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    ++files;
    const auto other = b / entry.path().filename();
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) ++differing;
  }
  std::size_t other_files = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(b)) ++other_files;
  return {files > 0 && differing == 0 && files == other_files,
          std::to_string(files) + " report files, " + std::to_string(differing) + " differ"};
}

// 8 ------------------------------------------------------------------------

V oracle_vote(std::size_t p, std::size_t n, std::size_t u) {
  if (p + n + u == 0) return V::unassigned;
  if (p > n && p > u) return V::positive;
  if (n > p && n > u) return V::negative;
  if (u > p && u > n) return V::neutral;
  return V::neutral;
}

bool vote_properties(Rng& rng) {
  const TweetPolarity all[] = {TweetPolarity::positive,  TweetPolarity::negative,   TweetPolarity::neutral,
                               TweetPolarity::discarded, TweetPolarity::irrelevant, TweetPolarity::unclassifiable};
  std::vector<TweetPolarity> tw(rng.below(16));
  for (auto& t : tw) t = all[rng.below(6)];
  const auto r = user_polarity(tw);
  auto shuffled = tw;
  rng.shuffle(shuffled);
  const auto s = user_polarity(shuffled);
  std::size_t p = 0, n = 0, u = 0;
  for (auto t : tw) {
    p += t == TweetPolarity::positive;
    n += t == TweetPolarity::negative;
    u += t == TweetPolarity::neutral;
  }
  // Force a tie at the top and confirm it resolves to neutral.
  std::vector<TweetPolarity> tie(1 + rng.below(5), TweetPolarity::positive);
  tie.insert(tie.end(), tie.size(), rng.bernoulli(0.5) ? TweetPolarity::negative : TweetPolarity::neutral);
  rng.shuffle(tie);
  return r.value == s.value && r.value == oracle_vote(p, n, u) && r.n_pos == p && r.n_neg == n && r.n_neu == u &&
         user_polarity(tie).value == V::neutral;
}

bool provenance_properties(Rng& rng) {
  const char* firsts[] = {"maria", "luca", "ana", "pat", "zed"};
  NameGenderTable names({{"maria", {Gender::female, 0.99}},
                         {"luca", {Gender::male, 0.95}},
                         {"ana", {Gender::female, 0.9}},
                         {"pat", {Gender::unknown, 0.5}}});
  UserProfile u;
  u.user_id = "u";
  u.display_name = std::string(firsts[rng.below(5)]) + (rng.bernoulli(0.5) ? " Rossi" : "");
  if (rng.bernoulli(0.1)) u.display_name = "";
  std::unordered_map<std::string, FaceObservation> responses;
  std::unordered_map<std::string, std::string> failures;
  const int kind = static_cast<int>(rng.below(5));
  FaceObservation obs;
  obs.face_count = static_cast<int>(rng.below(3));
  if (rng.bernoulli(0.8)) obs.gender = rng.bernoulli(0.5) ? Gender::male : Gender::female;
  if (rng.bernoulli(0.8)) obs.age = static_cast<int>(rng.between(10, 80));
  obs.confidence = rng.uniform();
  if (kind > 0) u.profile_image_ref = "img.jpg";
  if (kind == 1) failures["img.jpg"] = "timeout";
  else if (kind > 1) responses["img.jpg"] = obs;
  const FixtureFaceClient faces(responses, failures);

  const auto g = extract_gender(u, faces, names);
  const auto a = extract_age(u, faces);
  const bool face_usable = kind > 1 && obs.face_count == 1;

  GenderResult expected;
  if (face_usable && obs.gender) {
    expected = {*obs.gender, GenderSource::face_service, obs.confidence};
  } else {
    std::string first = u.display_name.substr(0, u.display_name.find(' '));
    auto hit = first.empty() ? std::nullopt : names.lookup(first);
    if (hit && hit->gender != Gender::unknown) expected = {hit->gender, GenderSource::name_table, hit->confidence};
  }
  const bool gender_ok = g.value == expected.value && g.source == expected.source &&
                         g.confidence == expected.confidence &&
                         ((g.source == GenderSource::none) == (g.value == Gender::unknown));
  const bool age_ok = face_usable && obs.age ? (a.years == obs.age && a.bucket == age_bucket(*obs.age))
                                             : (!a.years && a.bucket == AgeBucket::unknown);
  return gender_ok && age_ok;
}

bool hierarchy_properties(Rng& rng, const Gazetteer& gz) {
  const auto& entries = gz.entries();
  UserProfile u;
  u.user_id = "u";
  const int text_kind = static_cast<int>(rng.below(4));
  if (text_kind == 1) u.profile_location_text = rng.pick(entries).name;
  if (text_kind == 2) u.profile_location_text = "nowhere in particular, " + rng.pick(entries).name;
  if (text_kind == 3) u.profile_location_text = "xyzzy";
  std::vector<Tweet> tweets(rng.below(6));
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    auto& t = tweets[i];
    t.tweet_id = std::to_string(i);
    t.user_id = "u";
    t.created_at = parse_timestamp("2017-09-01T00:00:00Z") + std::chrono::hours(static_cast<int>(rng.below(500)));
    if (rng.bernoulli(0.7)) {
      const auto& e = rng.pick(entries);
      t.geo = GeoPoint{e.latitude + rng.uniform(-0.05, 0.05), e.longitude + rng.uniform(-0.05, 0.05)};
    } else if (rng.bernoulli(0.5)) {
      t.geo = GeoPoint{rng.uniform(-60, 60), rng.uniform(-180, 180)};
    }
  }
  const auto r = resolve_location(u, tweets, gz);
  const bool nested = (!r.city || r.region) && (!r.region || r.country);
  const bool none_empty = r.source != LocationSource::none || (!r.country && !r.region && !r.city);
  const bool support = r.source != LocationSource::geo_majority || r.supporting_count >= 1;
  bool known = true;
  if (r.country) {
    known = false;
    for (const auto& e : entries)
      known = known || (e.place.country == *r.country && (!r.region || e.place.region == *r.region) &&
                        (!r.city || e.place.city == *r.city));
  }
  return nested && none_empty && support && known;
}

bool conservation_properties(Rng& rng) {
  const V values[] = {V::positive, V::negative, V::neutral, V::unassigned};
  std::vector<AnnotatedUser> users(rng.below(80));
  std::vector<V> polarities;
  for (auto& u : users) {
    u.polarity = values[rng.below(4)];
    u.demographics.gender.value = static_cast<Gender>(rng.below(3));
    u.demographics.age.bucket = static_cast<AgeBucket>(rng.below(6));
    if (rng.bernoulli(0.8)) u.demographics.ethnicity.label = "e" + std::to_string(rng.below(9));
    if (rng.bernoulli(0.7)) {
      u.demographics.location.country = "c" + std::to_string(rng.below(3));
      if (rng.bernoulli(0.8)) u.demographics.location.region = "r" + std::to_string(rng.below(7));
      if (u.demographics.location.region && rng.bernoulli(0.7))
        u.demographics.location.city = "t" + std::to_string(rng.below(12));
    }
    polarities.push_back(u.polarity);
  }
  const auto dist = polarity_distribution(polarities);
  const std::size_t k = 1 + rng.below(6);
  for (auto dim : {BreakdownDimension::gender, BreakdownDimension::age_bucket, BreakdownDimension::ethnicity,
                   BreakdownDimension::country, BreakdownDimension::region, BreakdownDimension::city}) {
    const auto b = breakdown(users, dim, k);
    std::size_t sum = b.excluded;
    std::set<std::string> seen;
    for (const auto& r : b.rows) {
      sum += r.total();
      if (!seen.insert(r.category).second) return false;
    }
    if (sum != dist.n_polarized || b.rows.size() > k + 1) return false;
  }
  return dist.n_polarized == dist.n_positive + dist.n_negative + dist.n_neutral && dist.n_polarized <= dist.n_analyzed;
}

Outcome invariant_properties() {
  Rng rng(8);
  const Gazetteer gz(builtin_gazetteer());
  const int cases = 10000;
  std::map<std::string, int> failures;
  for (int i = 0; i < cases; ++i) {
    if (!vote_properties(rng)) ++failures["vote"];
    if (!provenance_properties(rng)) ++failures["provenance"];
    if (!hierarchy_properties(rng, gz)) ++failures["hierarchy"];
    if (!conservation_properties(rng)) ++failures["conservation"];
  }
  std::string detail = std::to_string(cases) + " cases per property";
  for (const auto& [name, count] : failures) detail += ", " + name + " failed " + std::to_string(count);
  return {failures.empty(), detail};
}

}  // namespace

int main() {
  log::set_level(log::Level::error);
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"combination truth table", combine_truth_table},
      {"filtering recovery", filtering_recovery},
      {"quartile oracle", quartile_oracle},
      {"metrics oracle", metrics_oracle},
      {"embedding separation", embedding_separation},
      {"predictor quality", predictor_quality},
      {"end-to-end recovery", end_to_end_recovery},
      {"invariant properties", invariant_properties},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %zu (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str(), seconds);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::error_code ec;
  fs::remove_all(scratch_root(), ec);
  return failed == 0 ? 0 : 1;
}
