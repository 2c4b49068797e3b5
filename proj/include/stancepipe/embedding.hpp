#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "stancepipe/corpus.hpp"

namespace stancepipe {

struct EmbeddingParams {
  int dimension = 100;
  int window = 5;
  int negative_samples = 5;
  int epochs = 5;
  double initial_learning_rate = 0.025;
  int min_count = 5;
  std::uint64_t seed = 1;

  /// Throws ValidationError listing the offending fields.
  void validate() const;
};

class EmbeddingModel {
 public:
  EmbeddingModel(std::vector<std::string> tokens, std::vector<float> vectors, EmbeddingParams params);

  std::size_t size() const { return tokens_.size(); }
  int dimension() const { return params_.dimension; }
  const EmbeddingParams& params() const { return params_; }

  std::optional<std::size_t> index_of(std::string_view token) const;
  const std::string& token(std::size_t index) const { return tokens_[index]; }
  std::span<const float> vector(std::size_t index) const;
  std::span<const float> raw() const { return vectors_; }

  /// Mean skip-gram negative-sampling loss per (center, context) pair for
  /// each training epoch; empty for loaded models.
  const std::vector<double>& epoch_losses() const { return epoch_losses_; }
  void set_epoch_losses(std::vector<double> losses) { epoch_losses_ = std::move(losses); }

  /// Text format: "<|V|> <dimension>" then "token v1 ... vd" per line, floats
  /// at 9 significant digits (exact round trip for single precision).
  void save(const std::filesystem::path& path) const;
  static EmbeddingModel load(const std::filesystem::path& path);

 private:
  std::vector<std::string> tokens_;
  std::vector<float> vectors_;
  EmbeddingParams params_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> epoch_losses_;
};

struct TweetVector {
  std::vector<double> values;
  std::size_t covered_tokens = 0;
};

/// Tokens with count >= min_count, ordered by count descending then token.
std::vector<std::pair<std::string, std::uint64_t>> build_vocabulary(std::span<const TokenizedText> corpus,
                                                                    int min_count);

/// Skip-gram with negative sampling, single-threaded. Negatives are drawn
/// from unigram^0.75; the learning rate decays linearly from its initial
/// value to 1e-4 of it. Bitwise reproducible for a given seed and corpus.
/// Throws ValidationError if no token reaches min_count.
EmbeddingModel train_embedding(std::span<const TokenizedText> corpus, const EmbeddingParams& params);

/// Mean of in-vocabulary token vectors; zero vector when none are covered.
TweetVector embed_tweet(const EmbeddingModel& model, const TokenizedText& tokens);

double cosine(std::span<const float> a, std::span<const float> b);

}  // namespace stancepipe
