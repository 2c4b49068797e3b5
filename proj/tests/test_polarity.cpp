#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>

#include "helpers.hpp"
#include "stancepipe/errors.hpp"
#include "stancepipe/polarity.hpp"

using namespace stancepipe;
using P = TweetPolarity;
using V = UserPolarity::Value;

namespace {

// Two Gaussian-free blobs separated by a margin of 1 around x + y = 0.
std::vector<LabeledVector> blobs(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-4, 4);
  std::vector<LabeledVector> out;
  while (out.size() < n) {
    const double x = u(gen), y = u(gen);
    const double d = (x + y) / std::sqrt(2.0);
    if (std::abs(d) < 0.5) continue;
    out.push_back({{x, y}, d > 0});
  }
  return out;
}

}  // namespace

TEST_CASE("combine truth table") {
  for (bool p : {false, true})
    for (bool n : {false, true}) CHECK(combine(false, p, n) == P::irrelevant);
  CHECK(combine(true, true, false) == P::positive);
  CHECK(combine(true, false, true) == P::negative);
  CHECK(combine(true, false, false) == P::neutral);
  CHECK(combine(true, true, true) == P::discarded);
}

TEST_CASE("predict examples") {
  LinearModel m;
  m.weights = {1, 0};
  auto r = predict(m, std::vector<double>{2, 5});
  CHECK(r.label);
  CHECK(r.margin == 2.0);
  r = predict(m, std::vector<double>{0, 7});
  CHECK_FALSE(r.label);
  CHECK(r.margin == 0.0);

  LinearModel neg;
  neg.weights = {0, 0};
  neg.bias = -1;
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-100, 100);
  for (int i = 0; i < 100; ++i) CHECK_FALSE(predict(neg, std::vector<double>{u(gen), u(gen)}).label);

  CHECK_THROWS_AS(predict(m, std::vector<double>{1, 2, 3}), ValidationError);
}

TEST_CASE("labels depend only on the sign of the margin") {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> g;
  for (int i = 0; i < 1000; ++i) {
    LinearModel m;
    m.weights = {g(gen), g(gen), g(gen)};
    m.bias = g(gen);
    const std::vector<double> v = {g(gen), g(gen), g(gen)};
    const auto r = predict(m, v);
    const double margin = m.weights[0] * v[0] + m.weights[1] * v[1] + m.weights[2] * v[2] + m.bias;
    CHECK(r.margin == doctest::Approx(margin).epsilon(1e-12));
    CHECK(r.label == (r.margin > 0));
  }
}

TEST_CASE("train_linear separates blobs") {
  const auto data = blobs(200, 3);
  TrainerConfig cfg;
  const auto m = train_linear(data, cfg);
  CHECK(m.trained_on == 200);
  std::size_t correct = 0;
  for (const auto& s : data) correct += predict(m, s.features).label == s.label;
  CHECK(correct == 200);

  const auto again = train_linear(data, cfg);
  CHECK(again.weights == m.weights);
  CHECK(again.bias == m.bias);
}

TEST_CASE("train_linear rejects bad input") {
  std::vector<LabeledVector> same = {{{1, 2}, true}, {{2, 1}, true}};
  CHECK_THROWS_AS(train_linear(same, {}), ValidationError);
  std::vector<LabeledVector> ragged = {{{1, 2}, true}, {{2}, false}};
  CHECK_THROWS_AS(train_linear(ragged, {}), ValidationError);
  std::vector<LabeledVector> one = {{{1, 2}, true}};
  CHECK_THROWS_AS(train_linear(one, {}), ValidationError);
}

TEST_CASE("model file round trip") {
  LinearModel m;
  m.weights = {0.1, -2.5e-7, 3.0};
  m.bias = -0.3333333333333333;
  testing::TempDir dir;
  m.save(dir / "m.model");
  const auto back = LinearModel::load(dir / "m.model");
  CHECK(back.weights == m.weights);
  CHECK(back.bias == m.bias);
  testing::write_file(dir / "bad.model", "3\n1 2\n0\n");
  CHECK_THROWS_AS(LinearModel::load(dir / "bad.model"), ParseError);
}

TEST_CASE("user_polarity examples") {
  auto r = user_polarity(std::vector<P>{P::positive, P::positive, P::negative});
  CHECK(r.value == V::positive);
  CHECK(r.n_pos == 2);
  CHECK(r.n_neg == 1);
  CHECK(r.n_neu == 0);
  CHECK(user_polarity(std::vector<P>{P::positive, P::negative}).value == V::neutral);
  CHECK(user_polarity(std::vector<P>{P::irrelevant, P::discarded}).value == V::unassigned);
  CHECK(user_polarity(std::vector<P>{}).value == V::unassigned);
  CHECK(user_polarity(std::vector<P>{P::unclassifiable, P::neutral}).value == V::neutral);
  CHECK(user_polarity(std::vector<P>{P::positive, P::negative, P::neutral}).value == V::neutral);
}

namespace {

V oracle_vote(std::size_t p, std::size_t n, std::size_t u) {
  if (p + n + u == 0) return V::unassigned;
  if (p > n && p > u) return V::positive;
  if (n > p && n > u) return V::negative;
  if (u > p && u > n) return V::neutral;
  return V::neutral;
}

}  // namespace

TEST_CASE("user_polarity properties") {
  std::mt19937_64 gen(17);
  const P all[] = {P::positive, P::negative, P::neutral, P::discarded, P::irrelevant, P::unclassifiable};
  const auto rank = [](V v) { return v == V::positive ? 2 : v == V::neutral ? 1 : v == V::negative ? 0 : -1; };
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<P> tw(gen() % 12);
    for (auto& t : tw) t = all[gen() % 6];
    const auto r = user_polarity(tw);
    CHECK(r.n_pos == static_cast<std::size_t>(std::count(tw.begin(), tw.end(), P::positive)));
    CHECK(r.n_neg == static_cast<std::size_t>(std::count(tw.begin(), tw.end(), P::negative)));
    CHECK(r.n_neu == static_cast<std::size_t>(std::count(tw.begin(), tw.end(), P::neutral)));
    CHECK(r.value == oracle_vote(r.n_pos, r.n_neg, r.n_neu));
    CHECK((r.value == V::unassigned) == (r.n_pos + r.n_neg + r.n_neu == 0));

    std::shuffle(tw.begin(), tw.end(), gen);
    CHECK(user_polarity(tw).value == r.value);

    tw.push_back(P::positive);
    const auto more = user_polarity(tw);
    if (r.value != V::unassigned) CHECK(rank(more.value) >= rank(r.value));
  }
}

TEST_CASE("metrics examples") {
  const std::array<bool, 4> truth = {true, false, true, false};
  const std::array<bool, 4> all_pos = {true, true, true, true};
  const auto m = metrics_from(confusion(all_pos, truth));
  CHECK(m.precision == 0.5);
  CHECK(m.recall == 1.0);
  CHECK(m.f_score == 2.0 / 3.0);
  CHECK(m.accuracy == 0.5);

  const auto perfect = metrics_from(confusion(truth, truth));
  CHECK(perfect.precision == 1);
  CHECK(perfect.recall == 1);
  CHECK(perfect.f_score == 1);
  CHECK(perfect.accuracy == 1);

  const std::array<bool, 4> none = {false, false, false, false};
  const auto z = metrics_from(confusion(none, truth));
  CHECK(z.precision == 0);
  CHECK(z.recall == 0);
  CHECK(z.f_score == 0);
  CHECK(z.accuracy == 0.5);

  const std::array<bool, 1> one = {true};
  CHECK_THROWS_AS(confusion(none, one), ValidationError);
  LinearModel lm;
  lm.weights = {1};
  CHECK_THROWS_AS(evaluate(lm, std::vector<LabeledVector>{}), ValidationError);
}

TEST_CASE("metrics identities on random confusion matrices") {
  std::mt19937_64 gen(23);
  for (int i = 0; i < 2000; ++i) {
    ConfusionMatrix cm{gen() % 50, gen() % 50, gen() % 50, gen() % 50};
    if (cm.total() == 0) continue;
    const auto m = metrics_from(cm);
    CHECK(m.accuracy == static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total()));
    if (m.precision + m.recall > 0)
      CHECK(m.f_score == doctest::Approx(2 * m.precision * m.recall / (m.precision + m.recall)).epsilon(1e-12));
    else
      CHECK(m.f_score == 0);
    for (double x : {m.precision, m.recall, m.f_score, m.accuracy}) CHECK((x >= 0 && x <= 1));
  }
}

TEST_CASE("fold sizes") {
  CHECK(fold_sizes(100, 10) == std::vector<std::size_t>(10, 10));
  CHECK(fold_sizes(10, 3) == std::vector<std::size_t>{4, 3, 3});
  for (std::size_t n = 1; n < 60; ++n)
    for (std::size_t k = 1; k <= n; ++k) {
      const auto f = fold_sizes(n, k);
      CHECK(f.size() == k);
      std::size_t sum = 0;
      for (auto s : f) sum += s;
      CHECK(sum == n);
      CHECK(*std::max_element(f.begin(), f.end()) - *std::min_element(f.begin(), f.end()) <= 1);
    }
}

TEST_CASE("cross validation") {
  const auto data = blobs(300, 5);
  const auto cv = cross_validate(data, 10, {});
  CHECK(cv.folds.size() == 10);
  CHECK(cv.fold_sizes == std::vector<std::size_t>(10, 30));
  CHECK(cv.mean.accuracy >= 0.95);
  double sum = 0;
  for (const auto& f : cv.folds) sum += f.accuracy;
  CHECK(cv.mean.accuracy == doctest::Approx(sum / 10).epsilon(1e-12));

  CHECK_THROWS_AS(cross_validate(blobs(5, 1), 10, {}), ValidationError);
  CHECK_THROWS_AS(cross_validate(data, 1, {}), ValidationError);
}

TEST_CASE("train/test split") {
  std::vector<LabeledVector> ten;
  for (int i = 0; i < 10; ++i) ten.push_back({{static_cast<double>(i)}, i % 2 == 0});
  auto s = split_train_test(ten, 0.8, 1);
  CHECK(s.train.size() == 8);
  CHECK(s.test.size() == 2);
  std::vector<LabeledVector> five(ten.begin(), ten.begin() + 5);
  s = split_train_test(five, 0.8, 1);
  CHECK(s.train.size() == 4);
  CHECK(s.test.size() == 1);

  const auto a = split_train_test(ten, 0.8, 9);
  const auto b = split_train_test(ten, 0.8, 9);
  for (std::size_t i = 0; i < a.train.size(); ++i) CHECK(a.train[i].features == b.train[i].features);

  CHECK_THROWS_AS(split_train_test(ten, 1.0, 1), ValidationError);
  CHECK_THROWS_AS(split_train_test(std::vector<LabeledVector>(ten.begin(), ten.begin() + 1), 0.5, 1),
                  ValidationError);
}

TEST_CASE("train and test sets are disjoint and exhaustive for every seed") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + gen() % 80;
    std::vector<LabeledVector> xs;
    for (std::size_t i = 0; i < n; ++i) xs.push_back({{static_cast<double>(i)}, false});
    const double ratio = 0.05 + 0.9 * static_cast<double>(gen() % 1000) / 1000.0;
    const auto s = split_train_test(xs, ratio, gen());
    std::set<double> seen;
    for (const auto& v : s.train) seen.insert(v.features[0]);
    for (const auto& v : s.test) seen.insert(v.features[0]);
    CHECK(seen.size() == n);
    CHECK(s.train.size() + s.test.size() == n);
    CHECK(s.train.size() == static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n))));
  }
}

TEST_CASE("polarity names round trip") {
  for (auto p : {P::positive, P::negative, P::neutral, P::discarded, P::irrelevant, P::unclassifiable})
    CHECK(parse_tweet_polarity(to_string(p)) == p);
  for (auto v : {V::positive, V::negative, V::neutral, V::unassigned}) CHECK(parse_user_polarity(to_string(v)) == v);
  CHECK_THROWS_AS(parse_tweet_polarity("maybe"), ValidationError);
}
