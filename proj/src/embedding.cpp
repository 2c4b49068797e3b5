#include "stancepipe/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "stancepipe/errors.hpp"
#include "stancepipe/rng.hpp"

namespace stancepipe {

void EmbeddingParams::validate() const {
  std::vector<std::string> bad;
  if (dimension <= 0 || dimension > 1024) bad.push_back("dimension must be in [1, 1024]");
  if (window <= 0) bad.push_back("window must be positive");
  if (negative_samples <= 0) bad.push_back("negative_samples must be positive");
  if (epochs <= 0) bad.push_back("epochs must be positive");
  if (!(initial_learning_rate > 0)) bad.push_back("initial_learning_rate must be positive");
  if (min_count <= 0) bad.push_back("min_count must be positive");
  if (!bad.empty()) {
    std::string msg = "invalid embedding parameters:";
    for (const auto& b : bad) msg += " " + b + ";";
    throw ValidationError(msg);
  }
}

EmbeddingModel::EmbeddingModel(std::vector<std::string> tokens, std::vector<float> vectors, EmbeddingParams params)
    : tokens_(std::move(tokens)), vectors_(std::move(vectors)), params_(params) {
  if (params_.dimension <= 0) throw ValidationError("embedding dimension must be positive");
  if (vectors_.size() != tokens_.size() * static_cast<std::size_t>(params_.dimension))
    throw ValidationError("embedding matrix size does not match vocabulary");
  for (std::size_t i = 0; i < tokens_.size(); ++i)
    if (!index_.emplace(tokens_[i], i).second) throw ValidationError("duplicate token '" + tokens_[i] + "'");
}

std::optional<std::size_t> EmbeddingModel::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const float> EmbeddingModel::vector(std::size_t index) const {
  const auto d = static_cast<std::size_t>(params_.dimension);
  return std::span<const float>(vectors_).subspan(index * d, d);
}

void EmbeddingModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write embedding model '" + path.string() + "'");
  out << tokens_.size() << ' ' << params_.dimension << '\n';
  char buf[32];
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    out << tokens_[i];
    for (float v : vector(i)) {
      std::snprintf(buf, sizeof buf, " %.9g", static_cast<double>(v));
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

EmbeddingModel EmbeddingModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embedding model '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string(), 1, "missing header");
  std::size_t count = 0;
  int dim = 0;
  {
    std::istringstream header(line);
    if (!(header >> count >> dim) || dim <= 0) throw ParseError(path.string(), 1, "header must be '<|V|> <dimension>'");
  }
  std::vector<std::string> tokens;
  std::vector<float> vectors;
  tokens.reserve(count);
  vectors.reserve(count * static_cast<std::size_t>(dim));
  for (std::size_t row = 0; row < count; ++row) {
    if (!std::getline(in, line)) throw ParseError(path.string(), row + 2, "truncated model file");
    const auto space = line.find(' ');
    if (space == std::string::npos || space == 0) throw ParseError(path.string(), row + 2, "missing token");
    tokens.push_back(line.substr(0, space));
    const char* p = line.c_str() + space;
    for (int k = 0; k < dim; ++k) {
      char* end = nullptr;
      const float v = std::strtof(p, &end);
      if (end == p) throw ParseError(path.string(), row + 2, "expected " + std::to_string(dim) + " values");
      vectors.push_back(v);
      p = end;
    }
  }
  EmbeddingParams params;
  params.dimension = dim;
  return EmbeddingModel(std::move(tokens), std::move(vectors), params);
}

std::vector<std::pair<std::string, std::uint64_t>> build_vocabulary(std::span<const TokenizedText> corpus,
                                                                    int min_count) {
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& text : corpus)
    for (const auto& t : text.tokens) ++counts[t];
  std::vector<std::pair<std::string, std::uint64_t>> vocab;
  for (auto& [token, n] : counts)
    if (n >= static_cast<std::uint64_t>(min_count)) vocab.emplace_back(token, n);
  std::sort(vocab.begin(), vocab.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return vocab;
}

namespace {

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

EmbeddingModel train_embedding(std::span<const TokenizedText> corpus, const EmbeddingParams& params) {
  params.validate();
  const auto vocab = build_vocabulary(corpus, params.min_count);
  if (vocab.empty()) throw ValidationError("no token reaches min_count; vocabulary is empty");

  const std::size_t dim = static_cast<std::size_t>(params.dimension);
  const std::size_t n_words = vocab.size();
  std::unordered_map<std::string, std::uint32_t> index;
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < n_words; ++i) {
    index.emplace(vocab[i].first, static_cast<std::uint32_t>(i));
    tokens.push_back(vocab[i].first);
  }

  std::vector<std::vector<std::uint32_t>> sentences;
  std::uint64_t train_words = 0;
  for (const auto& text : corpus) {
    std::vector<std::uint32_t> ids;
    for (const auto& t : text.tokens)
      if (auto it = index.find(t); it != index.end()) ids.push_back(it->second);
    train_words += ids.size();
    if (ids.size() >= 2) sentences.push_back(std::move(ids));
  }

  // Cumulative unigram^0.75 distribution for negative draws.
  std::vector<double> cumulative(n_words);
  double acc = 0;
  for (std::size_t i = 0; i < n_words; ++i) {
    acc += std::pow(static_cast<double>(vocab[i].second), 0.75);
    cumulative[i] = acc;
  }
  for (auto& c : cumulative) c /= acc;

  Rng rng(params.seed);
  std::vector<float> input(n_words * dim), output(n_words * dim, 0.0f);
  for (auto& v : input) v = static_cast<float>((rng.uniform() - 0.5) / static_cast<double>(dim));

  auto draw_negative = [&]() -> std::uint32_t {
    const double u = rng.uniform();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    return static_cast<std::uint32_t>(it - cumulative.begin());
  };

  const double lr0 = params.initial_learning_rate;
  const double total = static_cast<double>(train_words) * params.epochs + 1.0;
  double processed = 0;
  std::vector<float> grad(dim);
  std::vector<double> losses;

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    double loss_sum = 0;
    std::uint64_t pairs = 0;
    for (const auto& sentence : sentences) {
      const auto len = static_cast<long>(sentence.size());
      for (long pos = 0; pos < len; ++pos) {
        const float lr = static_cast<float>(lr0 * std::max(1e-4, 1.0 - processed / total));
        processed += 1;
        const long reach = params.window - static_cast<long>(rng.below(static_cast<std::size_t>(params.window)));
        float* center = &input[sentence[static_cast<std::size_t>(pos)] * dim];
        for (long c = std::max(0L, pos - reach); c <= std::min(len - 1, pos + reach); ++c) {
          if (c == pos) continue;
          const std::uint32_t context = sentence[static_cast<std::size_t>(c)];
          std::fill(grad.begin(), grad.end(), 0.0f);
          for (int s = 0; s <= params.negative_samples; ++s) {
            std::uint32_t target = context;
            float label = 1.0f;
            if (s > 0) {
              target = draw_negative();
              if (target == context) continue;
              label = 0.0f;
            }
            float* out = &output[target * dim];
            float f = 0;
            for (std::size_t k = 0; k < dim; ++k) f += center[k] * out[k];
            const double sig = 1.0 / (1.0 + std::exp(-static_cast<double>(f)));
            loss_sum += label > 0 ? softplus(-f) : softplus(f);
            const float g = static_cast<float>((label - sig) * lr);
            for (std::size_t k = 0; k < dim; ++k) grad[k] += g * out[k];
            for (std::size_t k = 0; k < dim; ++k) out[k] += g * center[k];
          }
          for (std::size_t k = 0; k < dim; ++k) center[k] += grad[k];
          ++pairs;
        }
      }
    }
    losses.push_back(pairs ? loss_sum / static_cast<double>(pairs) : 0.0);
  }

  EmbeddingModel model(std::move(tokens), std::move(input), params);
  model.set_epoch_losses(std::move(losses));
  return model;
}

TweetVector embed_tweet(const EmbeddingModel& model, const TokenizedText& tokens) {
  TweetVector out;
  out.values.assign(static_cast<std::size_t>(model.dimension()), 0.0);
  for (const auto& t : tokens.tokens) {
    auto idx = model.index_of(t);
    if (!idx) continue;
    const auto v = model.vector(*idx);
    for (std::size_t k = 0; k < v.size(); ++k) out.values[k] += v[k];
    ++out.covered_tokens;
  }
  if (out.covered_tokens > 0)
    for (auto& x : out.values) x /= static_cast<double>(out.covered_tokens);
  return out;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t k = 0; k < a.size() && k < b.size(); ++k) {
    dot += static_cast<double>(a[k]) * b[k];
    na += static_cast<double>(a[k]) * a[k];
    nb += static_cast<double>(b[k]) * b[k];
  }
  if (na == 0 || nb == 0) return 0;
  return dot / std::sqrt(na * nb);
}

}  // namespace stancepipe
