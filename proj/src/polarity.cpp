#include "stancepipe/polarity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "stancepipe/errors.hpp"
#include "stancepipe/rng.hpp"

namespace stancepipe {

void LinearModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write classifier '" + path.string() + "'");
  char buf[40];
  out << weights.size() << '\n';
  for (std::size_t i = 0; i < weights.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.17g", i ? " " : "", weights[i]);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "\n%.17g\n", bias);
  out << buf;
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

LinearModel LinearModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open classifier '" + path.string() + "'");
  std::string line;
  std::size_t dim = 0;
  if (!std::getline(in, line) || !(std::istringstream(line) >> dim) || dim == 0)
    throw ParseError(path.string(), 1, "header must be the dimension");
  LinearModel m;
  if (!std::getline(in, line)) throw ParseError(path.string(), 2, "missing weight line");
  std::istringstream weights(line);
  double w;
  while (weights >> w) m.weights.push_back(w);
  if (m.weights.size() != dim) throw ParseError(path.string(), 2, "expected " + std::to_string(dim) + " weights");
  if (!std::getline(in, line) || !(std::istringstream(line) >> m.bias)) throw ParseError(path.string(), 3, "missing bias");
  return m;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

struct SgdState {
  std::vector<double> w;
  double b = 0;
};

void sgd_pass(SgdState& st, std::span<const LabeledVector> samples, std::span<const std::size_t> order, double lambda,
              double eta0, double& t) {
  for (auto idx : order) {
    const auto& s = samples[idx];
    const double eta = eta0 / (1.0 + lambda * eta0 * t);
    const double y = s.label ? 1.0 : -1.0;
    const double z = y * (dot(st.w, s.features) + st.b);
    const double shrink = 1.0 - eta * lambda;
    for (auto& x : st.w) x *= shrink;
    if (z < 1.0) {
      for (std::size_t k = 0; k < st.w.size(); ++k) st.w[k] += eta * y * s.features[k];
      st.b += eta * y;
    }
    t += 1;
  }
}

double objective(const SgdState& st, std::span<const LabeledVector> samples, std::span<const std::size_t> order,
                 double lambda) {
  double loss = 0;
  for (auto idx : order) {
    const auto& s = samples[idx];
    const double y = s.label ? 1.0 : -1.0;
    loss += std::max(0.0, 1.0 - y * (dot(st.w, s.features) + st.b));
  }
  return loss / static_cast<double>(order.size()) + 0.5 * lambda * dot(st.w, st.w);
}

}  // namespace

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(idx);
  return idx;
}

LinearModel train_linear(std::span<const LabeledVector> samples, const TrainerConfig& config) {
  if (samples.size() < 2) throw ValidationError("linear training needs at least two samples");
  if (!(config.regularization > 0)) throw ValidationError("regularization must be positive");
  if (config.epochs <= 0) throw ValidationError("epochs must be positive");
  const std::size_t dim = samples.front().features.size();
  bool any_pos = false, any_neg = false;
  for (const auto& s : samples) {
    if (s.features.size() != dim) throw ValidationError("training vectors differ in dimension");
    (s.label ? any_pos : any_neg) = true;
  }
  if (!any_pos || !any_neg) throw ValidationError("linear training needs both labels present");

  // Fit on standardized features, then map the solution back to raw space.
  std::vector<double> mean(dim, 0.0), scale(dim, 0.0);
  for (const auto& s : samples)
    for (std::size_t k = 0; k < dim; ++k) mean[k] += s.features[k];
  for (auto& m : mean) m /= static_cast<double>(samples.size());
  for (const auto& s : samples)
    for (std::size_t k = 0; k < dim; ++k) scale[k] += (s.features[k] - mean[k]) * (s.features[k] - mean[k]);
  for (auto& v : scale) {
    v = std::sqrt(v / static_cast<double>(samples.size()));
    if (!(v > 1e-12)) v = 1.0;
  }
  std::vector<LabeledVector> standardized(samples.begin(), samples.end());
  for (auto& s : standardized)
    for (std::size_t k = 0; k < dim; ++k) s.features[k] = (s.features[k] - mean[k]) / scale[k];

  Rng rng(config.seed);
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);

  const double lambda = config.regularization;
  const std::span<const std::size_t> probe(order.data(), std::min<std::size_t>(order.size(), 1000));
  double eta0 = 1.0;
  double best = std::numeric_limits<double>::infinity();
  for (double candidate : {10.0, 3.0, 1.0, 0.3, 0.1, 0.03, 0.01}) {
    SgdState trial{std::vector<double>(dim, 0.0), 0.0};
    double t = 0;
    sgd_pass(trial, standardized, probe, lambda, candidate, t);
    const double obj = objective(trial, standardized, probe, lambda);
    if (obj < best) {
      best = obj;
      eta0 = candidate;
    }
  }

  SgdState st{std::vector<double>(dim, 0.0), 0.0};
  double t = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    sgd_pass(st, standardized, order, lambda, eta0, t);
  }
  LinearModel model;
  model.weights.resize(dim);
  model.bias = st.b;
  for (std::size_t k = 0; k < dim; ++k) {
    model.weights[k] = st.w[k] / scale[k];
    model.bias -= model.weights[k] * mean[k];
  }
  model.regularization = lambda;
  model.trained_on = samples.size();
  return model;
}

Prediction predict(const LinearModel& model, std::span<const double> features) {
  if (features.size() != model.weights.size())
    throw ValidationError("feature dimension " + std::to_string(features.size()) + " does not match model dimension " +
                          std::to_string(model.weights.size()));
  const double margin = dot(model.weights, features) + model.bias;
  return Prediction{margin > 0, margin};
}

const char* to_string(TweetPolarity p) {
  switch (p) {
    case TweetPolarity::positive: return "positive";
    case TweetPolarity::negative: return "negative";
    case TweetPolarity::neutral: return "neutral";
    case TweetPolarity::discarded: return "discarded";
    case TweetPolarity::irrelevant: return "irrelevant";
    case TweetPolarity::unclassifiable: return "unclassifiable";
  }
  return "unclassifiable";
}

TweetPolarity parse_tweet_polarity(std::string_view s) {
  for (auto p : {TweetPolarity::positive, TweetPolarity::negative, TweetPolarity::neutral, TweetPolarity::discarded,
                 TweetPolarity::irrelevant, TweetPolarity::unclassifiable})
    if (s == to_string(p)) return p;
  throw ValidationError("unknown tweet polarity '" + std::string(s) + "'");
}

TweetPolarity combine(bool relevant, bool positive, bool negative) {
  if (!relevant) return TweetPolarity::irrelevant;
  if (positive && negative) return TweetPolarity::discarded;
  if (positive) return TweetPolarity::positive;
  if (negative) return TweetPolarity::negative;
  return TweetPolarity::neutral;
}

void PredictorSuite::validate(std::size_t dimension) const {
  for (const auto* m : {&relevance, &positive, &negative})
    if (m->weights.size() != dimension)
      throw ValidationError("predictor dimension " + std::to_string(m->weights.size()) +
                            " does not match embedding dimension " + std::to_string(dimension));
}

TweetPolarity classify_tokens(const PredictorSuite& suite, const EmbeddingModel& embedding,
                              const TokenizedText& tokens) {
  const auto v = embed_tweet(embedding, tokens);
  if (v.covered_tokens == 0) return TweetPolarity::unclassifiable;
  if (!predict(suite.relevance, v.values).label) return TweetPolarity::irrelevant;
  return combine(true, predict(suite.positive, v.values).label, predict(suite.negative, v.values).label);
}

TweetPolarity classify_tweet(const PredictorSuite& suite, const EmbeddingModel& embedding, const Tweet& tweet,
                             const StopWords& stopwords) {
  return classify_tokens(suite, embedding, preprocess(tweet.text, stopwords));
}

const char* to_string(UserPolarity::Value v) {
  switch (v) {
    case UserPolarity::Value::positive: return "positive";
    case UserPolarity::Value::negative: return "negative";
    case UserPolarity::Value::neutral: return "neutral";
    case UserPolarity::Value::unassigned: return "unassigned";
  }
  return "unassigned";
}

UserPolarity::Value parse_user_polarity(std::string_view s) {
  for (auto v : {UserPolarity::Value::positive, UserPolarity::Value::negative, UserPolarity::Value::neutral,
                 UserPolarity::Value::unassigned})
    if (s == to_string(v)) return v;
  throw ValidationError("unknown user polarity '" + std::string(s) + "'");
}

UserPolarity user_polarity(std::span<const TweetPolarity> tweets) {
  UserPolarity u;
  for (auto p : tweets) {
    if (p == TweetPolarity::positive) ++u.n_pos;
    else if (p == TweetPolarity::negative) ++u.n_neg;
    else if (p == TweetPolarity::neutral) ++u.n_neu;
  }
  const auto top = std::max({u.n_pos, u.n_neg, u.n_neu});
  if (top == 0) {
    u.value = UserPolarity::Value::unassigned;
  } else if ((u.n_pos == top) + (u.n_neg == top) + (u.n_neu == top) > 1) {
    u.value = UserPolarity::Value::neutral;
  } else if (u.n_pos == top) {
    u.value = UserPolarity::Value::positive;
  } else if (u.n_neg == top) {
    u.value = UserPolarity::Value::negative;
  } else {
    u.value = UserPolarity::Value::neutral;
  }
  return u;
}

Metrics metrics_from(const ConfusionMatrix& cm) {
  Metrics m;
  const double tp = static_cast<double>(cm.tp);
  if (cm.tp + cm.fp > 0) m.precision = tp / static_cast<double>(cm.tp + cm.fp);
  if (cm.tp + cm.fn > 0) m.recall = tp / static_cast<double>(cm.tp + cm.fn);
  if (m.precision + m.recall > 0) m.f_score = 2 * m.precision * m.recall / (m.precision + m.recall);
  if (cm.total() > 0) m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  return m;
}

ConfusionMatrix confusion(std::span<const bool> predicted, std::span<const bool> truth) {
  if (predicted.size() != truth.size()) throw ValidationError("prediction and label counts differ");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i]) (truth[i] ? cm.tp : cm.fp)++;
    else (truth[i] ? cm.fn : cm.tn)++;
  }
  return cm;
}

Metrics evaluate(const LinearModel& model, std::span<const LabeledVector> test) {
  if (test.empty()) throw ValidationError("evaluation needs a non-empty test set");
  ConfusionMatrix cm;
  for (const auto& s : test) {
    const bool p = predict(model, s.features).label;
    if (p) (s.label ? cm.tp : cm.fp)++;
    else (s.label ? cm.fn : cm.tn)++;
  }
  return metrics_from(cm);
}

std::vector<std::size_t> fold_sizes(std::size_t n, std::size_t k) {
  std::vector<std::size_t> sizes(k, n / k);
  for (std::size_t i = 0; i < n % k; ++i) ++sizes[i];
  return sizes;
}

CrossValidation cross_validate(std::span<const LabeledVector> samples, std::size_t k, const TrainerConfig& config) {
  if (k < 2) throw ValidationError("cross-validation needs k >= 2");
  if (k > samples.size()) throw ValidationError("cross-validation needs at least k samples");
  const auto order = shuffled_indices(samples.size(), config.seed);
  CrossValidation cv;
  cv.fold_sizes = fold_sizes(samples.size(), k);
  std::size_t start = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t end = start + cv.fold_sizes[f];
    std::vector<LabeledVector> train, test;
    for (std::size_t i = 0; i < order.size(); ++i) (i >= start && i < end ? test : train).push_back(samples[order[i]]);
    start = end;
    cv.folds.push_back(evaluate(train_linear(train, config), test));
  }
  for (const auto& m : cv.folds) {
    cv.mean.precision += m.precision / static_cast<double>(k);
    cv.mean.recall += m.recall / static_cast<double>(k);
    cv.mean.f_score += m.f_score / static_cast<double>(k);
    cv.mean.accuracy += m.accuracy / static_cast<double>(k);
  }
  return cv;
}

TrainTestSplit split_train_test(std::span<const LabeledVector> samples, double ratio, std::uint64_t seed) {
  if (!(ratio > 0 && ratio < 1)) throw ValidationError("split ratio must lie strictly between 0 and 1");
  if (samples.size() < 2) throw ValidationError("split needs at least two samples");
  const auto order = shuffled_indices(samples.size(), seed);
  const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(samples.size())));
  TrainTestSplit split;
  for (std::size_t i = 0; i < order.size(); ++i) (i < n_train ? split.train : split.test).push_back(samples[order[i]]);
  return split;
}

}  // namespace stancepipe
