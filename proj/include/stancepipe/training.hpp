#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "stancepipe/corpus.hpp"
#include "stancepipe/embedding.hpp"
#include "stancepipe/polarity.hpp"

namespace stancepipe {

enum class TweetLabel { relevant, non_relevant, positive, negative, neutral };
const char* to_string(TweetLabel l);
std::optional<TweetLabel> parse_tweet_label(std::string_view s);

struct LabeledTweet {
  std::string text;
  TweetLabel label = TweetLabel::non_relevant;
};

/// Line-delimited `{"text": ..., "label": ...}` records. Throws ParseError
/// with the line number on a malformed record or unknown label.
std::vector<LabeledTweet> load_labeled_tweets(const std::filesystem::path& path);
void write_labeled_tweets(std::ostream& out, std::span<const LabeledTweet> tweets);

/// Ground-truth helper mimicking polarized-keyword labeling: positive when
/// only positive keywords occur, negative when only negative ones do,
/// nothing otherwise (including when both occur).
std::optional<TweetLabel> label_by_keywords(const TokenizedText& tokens, const std::vector<std::string>& positive,
                                            const std::vector<std::string>& negative);

struct TextSample {
  TokenizedText tokens;
  bool label = false;
};

struct TrainingSetSizes {
  std::size_t relevance_per_class = 1000;
  std::size_t polarity_per_class = 500;
};

struct PredictorDatasets {
  std::vector<TextSample> relevance;
  std::vector<TextSample> positive;
  std::vector<TextSample> negative;
};

/// relevance: relevant (any relevant or polar label) vs non_relevant.
/// positive: positive vs an even mix of negative and neutral; negative
/// symmetrically. Each side is sampled (seeded) down to the configured size;
/// short pools are used whole. For the "non-" side, a short half is topped
/// up from the other half.
PredictorDatasets compose_predictor_datasets(std::span<const LabeledTweet> labeled, const StopWords& stopwords,
                                             const TrainingSetSizes& sizes, std::uint64_t seed);

/// Drops samples with zero embedding coverage; `dropped` receives the count.
std::vector<LabeledVector> vectorize(const EmbeddingModel& embedding, std::span<const TextSample> samples,
                                     std::size_t* dropped = nullptr);

struct PredictorReport {
  std::string name;
  CrossValidation cv;
  Metrics test;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t dropped = 0;
};

struct SuiteTrainingConfig {
  double train_ratio = 0.8;
  std::size_t k_folds = 10;
  TrainerConfig trainer;
};

struct SuiteTraining {
  PredictorSuite suite;
  std::array<PredictorReport, 3> reports;  // relevance, positive, negative
};

/// Per predictor: split train/test, k-fold CV on the training part, fit on
/// the whole training part, score on the test part.
SuiteTraining train_predictor_suite(const PredictorDatasets& datasets, const EmbeddingModel& embedding,
                                    const SuiteTrainingConfig& config);

void write_predictor_metrics_csv(std::ostream& out, std::span<const PredictorReport> reports);

/// Reads the metrics table back. `dropped` is not part of the table and
/// comes back as zero. Throws ParseError on a malformed row.
std::vector<PredictorReport> read_predictor_metrics_csv(const std::filesystem::path& path);

}  // namespace stancepipe
