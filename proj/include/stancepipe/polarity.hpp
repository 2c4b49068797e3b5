#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "stancepipe/corpus.hpp"
#include "stancepipe/embedding.hpp"

namespace stancepipe {

/// One training/evaluation example; `label` true means the predictor's
/// designated class (relevant, positive or negative).
struct LabeledVector {
  std::vector<double> features;
  bool label = false;
};

struct LinearModel {
  std::vector<double> weights;
  double bias = 0;
  double regularization = 1e-4;
  std::size_t trained_on = 0;

  void save(const std::filesystem::path& path) const;
  static LinearModel load(const std::filesystem::path& path);
};

struct TrainerConfig {
  double regularization = 1e-4;
  int epochs = 50;
  std::uint64_t seed = 1;
};

/// Primal L2-regularized hinge loss minimized by stochastic subgradient
/// descent (eta_t = eta0 / (1 + lambda * eta0 * t)), reshuffled every epoch.
/// eta0 is picked from a fixed candidate grid by the objective after one
/// pass over a prefix of the shuffled data, so the run stays deterministic.
/// Features are standardized per dimension for the fit and the solution
/// is mapped back, so the returned weights apply to raw vectors. The bias
/// is not regularized. Throws ValidationError on one-class input,
/// ragged dimensions or fewer than two samples.
LinearModel train_linear(std::span<const LabeledVector> samples, const TrainerConfig& config);

struct Prediction {
  bool label = false;
  double margin = 0;
};

/// label = margin > 0; a zero margin falls to the "non-" class. Throws
/// ValidationError on dimension mismatch.
Prediction predict(const LinearModel& model, std::span<const double> features);

enum class TweetPolarity { positive, negative, neutral, discarded, irrelevant, unclassifiable };
const char* to_string(TweetPolarity p);
TweetPolarity parse_tweet_polarity(std::string_view s);

/// Second-stage combination of the two one-vs-rest predictors, gated by
/// the relevance predictor.
TweetPolarity combine(bool relevant, bool positive, bool negative);

struct PredictorSuite {
  LinearModel relevance;
  LinearModel positive;
  LinearModel negative;

  /// Throws ValidationError unless all three share `dimension`.
  void validate(std::size_t dimension) const;
};

TweetPolarity classify_tokens(const PredictorSuite& suite, const EmbeddingModel& embedding,
                              const TokenizedText& tokens);
TweetPolarity classify_tweet(const PredictorSuite& suite, const EmbeddingModel& embedding, const Tweet& tweet,
                             const StopWords& stopwords);

struct UserPolarity {
  enum class Value { positive, negative, neutral, unassigned };
  Value value = Value::unassigned;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::size_t n_neu = 0;
};
const char* to_string(UserPolarity::Value v);
UserPolarity::Value parse_user_polarity(std::string_view s);

/// Plurality over positive/negative/neutral tweets only; any tie at the top
/// is neutral; no such tweets at all is unassigned.
UserPolarity user_polarity(std::span<const TweetPolarity> tweets);

struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
};

struct Metrics {
  double precision = 0;
  double recall = 0;
  double f_score = 0;
  double accuracy = 0;
};

/// precision/recall are 0 when their denominator is 0.
Metrics metrics_from(const ConfusionMatrix& cm);
ConfusionMatrix confusion(std::span<const bool> predicted, std::span<const bool> truth);

/// Throws ValidationError on an empty test set.
Metrics evaluate(const LinearModel& model, std::span<const LabeledVector> test);

struct CrossValidation {
  std::vector<Metrics> folds;
  std::vector<std::size_t> fold_sizes;
  Metrics mean;
};

/// Sizes of k contiguous folds over n items: the first n % k folds get one
/// extra item.
std::vector<std::size_t> fold_sizes(std::size_t n, std::size_t k);

/// Seeded shuffle (config.seed), contiguous folds, train on k-1 folds and
/// evaluate on the held-out one.
CrossValidation cross_validate(std::span<const LabeledVector> samples, std::size_t k, const TrainerConfig& config);

struct TrainTestSplit {
  std::vector<LabeledVector> train;
  std::vector<LabeledVector> test;
};

/// Seeded shuffle; train gets round(ratio * n) items.
TrainTestSplit split_train_test(std::span<const LabeledVector> samples, double ratio, std::uint64_t seed);

/// Seeded shuffled index permutation shared by split/CV.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

}  // namespace stancepipe
