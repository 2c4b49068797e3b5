#include "stancepipe/training.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>

#include "stancepipe/csv.hpp"
#include "stancepipe/errors.hpp"
#include "stancepipe/log.hpp"
#include "stancepipe/rng.hpp"
#include "stancepipe/text.hpp"

namespace stancepipe {

const char* to_string(TweetLabel l) {
  switch (l) {
    case TweetLabel::relevant: return "relevant";
    case TweetLabel::non_relevant: return "non_relevant";
    case TweetLabel::positive: return "positive";
    case TweetLabel::negative: return "negative";
    case TweetLabel::neutral: return "neutral";
  }
  return "non_relevant";
}

std::optional<TweetLabel> parse_tweet_label(std::string_view s) {
  for (auto l : {TweetLabel::relevant, TweetLabel::non_relevant, TweetLabel::positive, TweetLabel::negative,
                 TweetLabel::neutral})
    if (s == to_string(l)) return l;
  return std::nullopt;
}

std::vector<LabeledTweet> load_labeled_tweets(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open labeled tweets '" + path.string() + "'");
  std::vector<LabeledTweet> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("text") || !j["text"].is_string() ||
        !j.contains("label") || !j["label"].is_string())
      throw ParseError(path.string(), lineno, "expected {\"text\": string, \"label\": string}");
    auto label = parse_tweet_label(j["label"].get<std::string>());
    if (!label) throw ParseError(path.string(), lineno, "unknown label '" + j["label"].get<std::string>() + "'");
    out.push_back(LabeledTweet{j["text"].get<std::string>(), *label});
  }
  return out;
}

void write_labeled_tweets(std::ostream& out, std::span<const LabeledTweet> tweets) {
  for (const auto& t : tweets) out << nlohmann::json{{"text", t.text}, {"label", to_string(t.label)}}.dump() << '\n';
}

std::optional<TweetLabel> label_by_keywords(const TokenizedText& tokens, const std::vector<std::string>& positive,
                                            const std::vector<std::string>& negative) {
  auto has_any = [&](const std::vector<std::string>& words) {
    for (const auto& w : words)
      if (std::find(tokens.tokens.begin(), tokens.tokens.end(), casefold(w)) != tokens.tokens.end()) return true;
    return false;
  };
  const bool pos = has_any(positive);
  const bool neg = has_any(negative);
  if (pos && !neg) return TweetLabel::positive;
  if (neg && !pos) return TweetLabel::negative;
  return std::nullopt;
}

namespace {

std::vector<const LabeledTweet*> sample(std::vector<const LabeledTweet*> pool, std::size_t n, Rng& rng,
                                        const char* what) {
  rng.shuffle(pool);
  if (pool.size() < n) {
    log::warn(std::string("only ") + std::to_string(pool.size()) + " " + what + " examples available, wanted " +
              std::to_string(n));
  } else {
    pool.resize(n);
  }
  return pool;
}

void append(std::vector<TextSample>& out, const std::vector<const LabeledTweet*>& tweets, bool label,
            const StopWords& stopwords) {
  for (const auto* t : tweets) out.push_back(TextSample{preprocess(t->text, stopwords), label});
}

/// Even mix of two pools totalling n; a short pool is topped up from the other.
std::vector<const LabeledTweet*> balanced_mix(std::vector<const LabeledTweet*> a, std::vector<const LabeledTweet*> b,
                                              std::size_t n, Rng& rng) {
  rng.shuffle(a);
  rng.shuffle(b);
  std::size_t take_a = std::min(a.size(), n / 2 + n % 2);
  std::size_t take_b = std::min(b.size(), n - take_a);
  take_a = std::min(a.size(), n - take_b);
  std::vector<const LabeledTweet*> out(a.begin(), a.begin() + static_cast<long>(take_a));
  out.insert(out.end(), b.begin(), b.begin() + static_cast<long>(take_b));
  if (out.size() < n) log::warn("non-class mix short: " + std::to_string(out.size()) + " of " + std::to_string(n));
  return out;
}

PredictorReport fit_one(const std::string& name, std::span<const TextSample> samples, const EmbeddingModel& embedding,
                        const SuiteTrainingConfig& config, LinearModel& model_out) {
  PredictorReport report;
  report.name = name;
  const auto vectors = vectorize(embedding, samples, &report.dropped);
  auto split = split_train_test(vectors, config.train_ratio, config.trainer.seed);
  report.n_train = split.train.size();
  report.n_test = split.test.size();
  report.cv = cross_validate(split.train, config.k_folds, config.trainer);
  model_out = train_linear(split.train, config.trainer);
  report.test = evaluate(model_out, split.test);
  return report;
}

}  // namespace

PredictorDatasets compose_predictor_datasets(std::span<const LabeledTweet> labeled, const StopWords& stopwords,
                                             const TrainingSetSizes& sizes, std::uint64_t seed) {
  std::vector<const LabeledTweet*> relevant, non_relevant, positive, negative, neutral;
  for (const auto& t : labeled) {
    switch (t.label) {
      case TweetLabel::non_relevant: non_relevant.push_back(&t); break;
      case TweetLabel::relevant: relevant.push_back(&t); break;
      case TweetLabel::positive: relevant.push_back(&t); positive.push_back(&t); break;
      case TweetLabel::negative: relevant.push_back(&t); negative.push_back(&t); break;
      case TweetLabel::neutral: relevant.push_back(&t); neutral.push_back(&t); break;
    }
  }
  Rng rng(seed);
  PredictorDatasets d;
  append(d.relevance, sample(relevant, sizes.relevance_per_class, rng, "relevant"), true, stopwords);
  append(d.relevance, sample(non_relevant, sizes.relevance_per_class, rng, "non-relevant"), false, stopwords);
  append(d.positive, sample(positive, sizes.polarity_per_class, rng, "positive"), true, stopwords);
  append(d.positive, balanced_mix(negative, neutral, sizes.polarity_per_class, rng), false, stopwords);
  append(d.negative, sample(negative, sizes.polarity_per_class, rng, "negative"), true, stopwords);
  append(d.negative, balanced_mix(positive, neutral, sizes.polarity_per_class, rng), false, stopwords);
  return d;
}

std::vector<LabeledVector> vectorize(const EmbeddingModel& embedding, std::span<const TextSample> samples,
                                     std::size_t* dropped) {
  std::vector<LabeledVector> out;
  std::size_t skipped = 0;
  for (const auto& s : samples) {
    auto v = embed_tweet(embedding, s.tokens);
    if (v.covered_tokens == 0) {
      ++skipped;
      continue;
    }
    out.push_back(LabeledVector{std::move(v.values), s.label});
  }
  if (dropped) *dropped = skipped;
  return out;
}

SuiteTraining train_predictor_suite(const PredictorDatasets& datasets, const EmbeddingModel& embedding,
                                    const SuiteTrainingConfig& config) {
  SuiteTraining out;
  out.reports[0] = fit_one("relevance", datasets.relevance, embedding, config, out.suite.relevance);
  out.reports[1] = fit_one("positive", datasets.positive, embedding, config, out.suite.positive);
  out.reports[2] = fit_one("negative", datasets.negative, embedding, config, out.suite.negative);
  return out;
}

void write_predictor_metrics_csv(std::ostream& out, std::span<const PredictorReport> reports) {
  csv::write_row(out, {"predictor", "evaluation", "precision", "recall", "f_score", "accuracy", "n"});
  for (const auto& r : reports) {
    auto row = [&](const std::string& what, const Metrics& m, std::size_t n) {
      csv::write_row(out, {r.name, what, csv::fixed(m.precision, 4), csv::fixed(m.recall, 4), csv::fixed(m.f_score, 4),
                           csv::fixed(m.accuracy, 4), std::to_string(n)});
    };
    row("test", r.test, r.n_test);
    row("cv_mean", r.cv.mean, r.n_train);
    for (std::size_t f = 0; f < r.cv.folds.size(); ++f)
      row("cv_fold_" + std::to_string(f + 1), r.cv.folds[f], r.cv.fold_sizes[f]);
  }
}

std::vector<PredictorReport> read_predictor_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<PredictorReport> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || starts_with(line, "predictor,")) continue;
    auto f = csv::parse_line(line);
    if (!f || f->size() != 7) throw ParseError(path.string(), lineno, "expected 7 columns");
    Metrics m;
    std::size_t n = 0;
    try {
      m.precision = std::stod((*f)[2]);
      m.recall = std::stod((*f)[3]);
      m.f_score = std::stod((*f)[4]);
      m.accuracy = std::stod((*f)[5]);
      n = std::stoul((*f)[6]);
    } catch (const std::exception&) {
      throw ParseError(path.string(), lineno, "non-numeric metric");
    }
    const auto& name = (*f)[0];
    const auto& what = (*f)[1];
    if (out.empty() || out.back().name != name) {
      out.emplace_back();
      out.back().name = name;
    }
    auto& r = out.back();
    if (what == "test") {
      r.test = m;
      r.n_test = n;
    } else if (what == "cv_mean") {
      r.cv.mean = m;
      r.n_train = n;
    } else if (starts_with(what, "cv_fold_")) {
      r.cv.folds.push_back(m);
      r.cv.fold_sizes.push_back(n);
    } else {
      throw ParseError(path.string(), lineno, "unknown evaluation '" + what + "'");
    }
  }
  return out;
}

}  // namespace stancepipe
