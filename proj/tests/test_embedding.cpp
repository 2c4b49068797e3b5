#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "helpers.hpp"
#include "stancepipe/embedding.hpp"
#include "stancepipe/errors.hpp"

using namespace stancepipe;

namespace {

TokenizedText toks(std::initializer_list<const char*> words) {
  TokenizedText t;
  for (const char* w : words) t.tokens.emplace_back(w);
  return t;
}

std::vector<TokenizedText> small_corpus(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 gen(seed);
  const std::vector<std::string> words = {"alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta"};
  std::vector<TokenizedText> out;
  for (std::size_t i = 0; i < n; ++i) {
    TokenizedText t;
    const int len = 3 + static_cast<int>(gen() % 6);
    for (int j = 0; j < len; ++j) t.tokens.push_back(words[gen() % words.size()]);
    out.push_back(std::move(t));
  }
  return out;
}

EmbeddingParams small_params() {
  EmbeddingParams p;
  p.dimension = 16;
  p.epochs = 3;
  p.min_count = 1;
  p.seed = 7;
  return p;
}

}  // namespace

TEST_CASE("params validation") {
  EmbeddingParams p;
  CHECK_NOTHROW(p.validate());
  p.dimension = 0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p.dimension = 1025;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = EmbeddingParams{};
  p.initial_learning_rate = 0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("vocabulary is count-threshold exact") {
  const auto corpus = small_corpus(3, 200);
  std::map<std::string, std::uint64_t> counts;
  for (const auto& t : corpus)
    for (const auto& w : t.tokens) ++counts[w];
  for (int min_count : {1, 50, 120, 150, 100000}) {
    const auto vocab = build_vocabulary(corpus, min_count);
    std::size_t expected = 0;
    for (const auto& [w, c] : counts) expected += c >= static_cast<std::uint64_t>(min_count);
    CHECK(vocab.size() == expected);
    for (const auto& [w, c] : vocab) {
      CHECK(counts.at(w) == c);
      CHECK(c >= static_cast<std::uint64_t>(min_count));
    }
    for (std::size_t i = 1; i < vocab.size(); ++i)
      CHECK((vocab[i - 1].second > vocab[i].second ||
             (vocab[i - 1].second == vocab[i].second && vocab[i - 1].first < vocab[i].first)));
  }
}

TEST_CASE("min_count above every count is rejected") {
  std::vector<TokenizedText> corpus(20, toks({"same", "sentence", "again"}));
  EmbeddingParams p = small_params();
  p.min_count = 21;
  CHECK_THROWS_AS(train_embedding(corpus, p), ValidationError);
}

TEST_CASE("training is deterministic and produces nonzero vectors") {
  const auto corpus = small_corpus(5, 300);
  const auto a = train_embedding(corpus, small_params());
  const auto b = train_embedding(corpus, small_params());
  REQUIRE(a.raw().size() == b.raw().size());
  CHECK(std::equal(a.raw().begin(), a.raw().end(), b.raw().begin()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto v = a.vector(i);
    CHECK(std::any_of(v.begin(), v.end(), [](float x) { return x != 0.0f; }));
  }
  for (double loss : a.epoch_losses()) CHECK(std::isfinite(loss));

  auto other = small_params();
  other.seed = 8;
  const auto c = train_embedding(corpus, other);
  CHECK_FALSE(std::equal(a.raw().begin(), a.raw().end(), c.raw().begin()));
}

TEST_CASE("embed_tweet examples") {
  const auto model = train_embedding(small_corpus(9, 200), small_params());
  const auto idx = model.index_of("alpha");
  REQUIRE(idx);
  const auto w = model.vector(*idx);

  const auto one = embed_tweet(model, toks({"alpha"}));
  CHECK(one.covered_tokens == 1);
  for (int d = 0; d < model.dimension(); ++d) CHECK(one.values[d] == static_cast<double>(w[d]));

  const auto two = embed_tweet(model, toks({"alpha", "alpha"}));
  CHECK(two.covered_tokens == 2);
  for (int d = 0; d < model.dimension(); ++d) CHECK(two.values[d] == doctest::Approx(w[d]).epsilon(1e-12));

  const auto oov = embed_tweet(model, toks({"zzz", "qqq"}));
  CHECK(oov.covered_tokens == 0);
  CHECK(oov.values.size() == static_cast<std::size_t>(model.dimension()));
  CHECK(std::all_of(oov.values.begin(), oov.values.end(), [](double x) { return x == 0; }));

  const auto mixed = embed_tweet(model, toks({"zzz", "alpha"}));
  CHECK(mixed.covered_tokens == 1);
}

TEST_CASE("embed_tweet is permutation invariant and stays in the hull") {
  const auto model = train_embedding(small_corpus(11, 200), small_params());
  std::mt19937_64 gen(4);
  double max_norm = 0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    double n = 0;
    for (float x : model.vector(i)) n += static_cast<double>(x) * x;
    max_norm = std::max(max_norm, std::sqrt(n));
  }
  for (int trial = 0; trial < 500; ++trial) {
    TokenizedText t;
    const int len = 1 + static_cast<int>(gen() % 10);
    for (int j = 0; j < len; ++j)
      t.tokens.push_back(gen() % 5 == 0 ? "oov" : model.token(gen() % model.size()));
    auto shuffled = t;
    std::shuffle(shuffled.tokens.begin(), shuffled.tokens.end(), gen);
    const auto a = embed_tweet(model, t);
    const auto b = embed_tweet(model, shuffled);
    CHECK(a.covered_tokens == b.covered_tokens);
    double norm = 0;
    for (int d = 0; d < model.dimension(); ++d) {
      CHECK(a.values[d] == doctest::Approx(b.values[d]).epsilon(1e-9));
      norm += a.values[d] * a.values[d];
    }
    CHECK(std::sqrt(norm) <= max_norm + 1e-9);
  }
}

TEST_CASE("model file round trip is lossless") {
  const auto model = train_embedding(small_corpus(13, 100), small_params());
  testing::TempDir dir;
  model.save(dir / "m.vec");
  const auto back = EmbeddingModel::load(dir / "m.vec");
  REQUIRE(back.size() == model.size());
  CHECK(back.dimension() == model.dimension());
  for (std::size_t i = 0; i < model.size(); ++i) CHECK(back.token(i) == model.token(i));
  CHECK(std::equal(model.raw().begin(), model.raw().end(), back.raw().begin()));

  testing::write_file(dir / "bad.vec", "2 3\na 1 2 3\nb 1 2\n");
  CHECK_THROWS_AS(EmbeddingModel::load(dir / "bad.vec"), ParseError);
}

TEST_CASE("cosine") {
  const std::vector<float> a = {1, 0}, b = {0, 2}, c = {3, 0}, z = {0, 0};
  CHECK(cosine(a, b) == doctest::Approx(0));
  CHECK(cosine(a, c) == doctest::Approx(1));
  CHECK(cosine(a, z) == 0);
}
