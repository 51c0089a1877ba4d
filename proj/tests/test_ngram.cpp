#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "doctest.h"

#include "gsnprobe/error.hpp"
#include "gsnprobe/ngram.hpp"
#include "gsnprobe/tabular.hpp"

using namespace gsnprobe;
using namespace gsnprobe::ngram;

namespace {

using Sentences = std::vector<std::vector<std::string>>;

// Interpolated Kneser-Ney bigram probabilities computed from the list of
// (previous, word) pairs, with "<s>" as the sentence-start history.
struct BigramOracle {
  double d;
  std::map<std::pair<std::string, std::string>, double> pair_count;
  std::set<std::string> vocab;

  BigramOracle(const Sentences& corpus, double discount) : d(discount) {
    for (const auto& s : corpus) {
      std::string prev = "<s>";
      for (const auto& w : s) {
        pair_count[{prev, w}] += 1.0;
        vocab.insert(w);
        prev = w;
      }
    }
  }

  double continuation(const std::string& w) const {
    double n = 0.0;
    for (const auto& [p, c] : pair_count) n += p.first != "<s>" && p.second == w;
    return n;
  }

  double unigram(const std::string& w) const {
    double types = 0.0, covered = 0.0;
    for (const auto& [p, c] : pair_count) types += p.first != "<s>";
    if (types == 0.0) return 1.0 / static_cast<double>(vocab.size());
    for (const auto& v : vocab) covered += continuation(v) > 0.0;
    return std::max(continuation(w) - d, 0.0) / types +
           d * covered / types / static_cast<double>(vocab.size());
  }

  double bigram(const std::string& h, const std::string& w) const {
    double total = 0.0, followers = 0.0, c = 0.0;
    for (const auto& [p, n] : pair_count) {
      if (p.first != h) continue;
      total += n;
      followers += 1.0;
      if (p.second == w) c = n;
    }
    if (total == 0.0) return unigram(w);
    return std::max(c - d, 0.0) / total + d * followers / total * unigram(w);
  }
};

Sentences random_corpus(Rng& rng, std::size_t lines, std::size_t vocab) {
  Sentences out;
  for (std::size_t i = 0; i < lines; ++i) {
    std::vector<std::string> s;
    const std::size_t len = 1 + rng.index(8);
    for (std::size_t k = 0; k < len; ++k) s.push_back("v" + std::to_string(rng.index(vocab)));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST_CASE("single-word corpus gives probability one") {
  const Sentences corpus{{"a", "a", "a"}};
  for (std::size_t order : {1u, 2u, 3u}) {
    const auto m = NgramModel::train(corpus, order);
    CHECK(m.distribution({}) == std::vector<double>{1.0});
    Rng rng(1);
    CHECK(m.sample_words(6, rng) == std::vector<std::string>(6, "a"));
  }
}

TEST_CASE("alternating corpus bigram conditionals match the count oracle") {
  const Sentences corpus{{"a", "b", "a", "b"}};
  for (double d : {0.75, 0.5, 0.1}) {
    const auto m = NgramModel::train(corpus, 2, d);
    const BigramOracle oracle(corpus, d);
    const WordId a = *m.id("a"), b = *m.id("b");
    const std::vector<WordId> ha{a}, hb{b};
    CHECK(std::abs(m.probability(ha, b) - oracle.bigram("a", "b")) <= 1e-12);
    CHECK(std::abs(m.probability(ha, b) - (1.0 - d / 4.0)) <= 1e-12);
    CHECK(std::abs(m.probability(ha, a) - d / 4.0) <= 1e-12);
    CHECK(std::abs(m.probability(hb, a) - oracle.bigram("b", "a")) <= 1e-12);
    CHECK(std::abs(m.probability(hb, b) - oracle.bigram("b", "b")) <= 1e-12);
    CHECK(std::abs(oracle.unigram("b") - 0.5) <= 1e-12);
  }
  const auto m = NgramModel::train(corpus, 2, 0.75);
  const std::vector<WordId> ha{*m.id("a")}, hb{*m.id("b")};
  CHECK(m.probability(ha, *m.id("b")) == doctest::Approx(0.8125).epsilon(1e-15));
  CHECK(m.probability(hb, *m.id("b")) == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(m.probability(hb, *m.id("a")) == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(m.probability(ha, *m.id("a")) == doctest::Approx(0.1875).epsilon(1e-15));
}

TEST_CASE("bigram model matches the count oracle on random corpora") {
  Rng rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const auto corpus = random_corpus(rng, 30, 6);
    const auto m = NgramModel::train(corpus, 2, 0.75);
    const BigramOracle oracle(corpus, 0.75);
    for (const auto& h : m.words()) {
      for (const auto& w : m.words()) {
        const std::vector<WordId> ctx{*m.id(h)};
        CHECK(std::abs(m.probability(ctx, *m.id(w)) - oracle.bigram(h, w)) <= 1e-12);
      }
      const std::vector<WordId> start{m.bos()};
      CHECK(std::abs(m.probability(start, *m.id(h)) - oracle.bigram("<s>", h)) <= 1e-12);
    }
  }
}

TEST_CASE("conditionals normalize for random contexts at every order") {
  Rng rng(21);
  const auto corpus = random_corpus(rng, 200, 15);
  for (std::size_t order : {1u, 2u, 3u, 5u}) {
    const auto m = NgramModel::train(corpus, order, 0.75);
    for (int i = 0; i < 100; ++i) {
      std::vector<WordId> ctx;
      const std::size_t len = rng.index(order + 1);
      for (std::size_t k = 0; k < len; ++k) {
        const auto r = rng.index(m.vocab_size() + 2);
        ctx.push_back(static_cast<WordId>(r));
      }
      const auto p = m.distribution(ctx);
      CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) <= 1e-9);
      double scalar = 0.0;
      for (WordId w = 0; w < m.vocab_size(); ++w) {
        const double q = m.probability(ctx, w);
        CHECK(std::abs(q - p[w]) <= 1e-12);
        scalar += q;
      }
      CHECK(std::abs(scalar - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("small discounts approach maximum likelihood on full-support contexts") {
  Sentences corpus;
  for (int i = 0; i < 20; ++i) corpus.push_back({"x", "a"});
  for (int i = 0; i < 30; ++i) corpus.push_back({"x", "b"});
  for (int i = 0; i < 50; ++i) corpus.push_back({"x", "x"});
  const auto m = NgramModel::train(corpus, 2, 1e-6);
  const std::vector<WordId> hx{*m.id("x")};
  // After x: a 20, b 30, x 50 of 100.
  CHECK(std::abs(m.probability(hx, *m.id("a")) - 0.2) <= 1e-4);
  CHECK(std::abs(m.probability(hx, *m.id("b")) - 0.3) <= 1e-4);
  CHECK(std::abs(m.probability(hx, *m.id("x")) - 0.5) <= 1e-4);
}

TEST_CASE("repeated five-word line is reproduced by five-gram sampling") {
  const Sentences corpus(200, std::vector<std::string>{"a", "b", "c", "d", "e"});
  const auto m = NgramModel::train(corpus, 5);
  Rng rng(5);
  int exact = 0;
  for (int i = 0; i < 20; ++i) {
    exact += m.sample_words(5, rng) == std::vector<std::string>{"a", "b", "c", "d", "e"};
  }
  CHECK(exact >= 19);
}

TEST_CASE("sampled unigram frequencies follow the model") {
  Rng rng(13);
  const auto corpus = random_corpus(rng, 300, 20);
  const auto m = NgramModel::train(corpus, 1);
  const auto law = m.distribution({});
  const auto draws = m.sample(100000, rng);
  std::vector<double> freq(m.vocab_size(), 0.0);
  for (auto w : draws) freq[w] += 1e-5;
  CHECK(tabular::tv_distance(freq, law) <= 0.02);
}

TEST_CASE("sampling is deterministic per seed") {
  Rng rng(2);
  const auto m = NgramModel::train(random_corpus(rng, 100, 10), 3);
  Rng a(99), b(99);
  CHECK(m.sample(10, a) == m.sample(10, b));
}

TEST_CASE("training rejects empty corpora and bad discounts") {
  CHECK_THROWS_AS(NgramModel::train(Sentences{}, 3), UsageError);
  CHECK_THROWS_AS(NgramModel::train(Sentences{{"a"}}, 3, 1.0), UsageError);
  CHECK_THROWS_AS(NgramModel::train(Sentences{{"a"}}, 3, 0.0), UsageError);
  CHECK_THROWS_AS(NgramModel::train(Sentences{{"a"}}, 0), UsageError);
}

TEST_CASE("model json round trip preserves every probability") {
  Rng rng(4);
  const auto m = NgramModel::train(random_corpus(rng, 80, 8), 3, 0.6);
  const auto back = NgramModel::from_json(m.to_json());
  CHECK(back.words() == m.words());
  for (int i = 0; i < 30; ++i) {
    const std::vector<WordId> ctx{static_cast<WordId>(rng.index(m.vocab_size() + 1)),
                                  static_cast<WordId>(rng.index(m.vocab_size()))};
    CHECK(back.distribution(ctx) == m.distribution(ctx));
  }
  CHECK_THROWS_AS(NgramModel::from_json(nlohmann::json{{"order", 2}}), FormatError);
}

TEST_CASE("fixed-length conditionals equal the brute-force joint ratio") {
  Rng rng(17);
  const auto m = NgramModel::train(random_corpus(rng, 60, 4), 3, 0.75);
  const std::size_t length = 5;
  NgramConditionalModel model(m, length);
  const auto joint = [&](const std::vector<WordId>& x) {
    double p = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const std::vector<WordId> prefix(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(i));
      p *= m.probability(m.sentence_context(prefix), x[i]);
    }
    return p;
  };
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<WordId> x(length);
    for (auto& w : x) w = static_cast<WordId>(rng.index(m.vocab_size()));
    const std::size_t site = rng.index(length);
    std::vector<double> oracle(m.vocab_size());
    for (WordId v = 0; v < m.vocab_size(); ++v) {
      auto y = x;
      y[site] = v;
      oracle[v] = joint(y);
    }
    const double z = std::accumulate(oracle.begin(), oracle.end(), 0.0);
    const auto p = model.query(TokenSequence(x), site);
    REQUIRE(p.size() == m.vocab_size() + 2);
    for (WordId v = 0; v < m.vocab_size(); ++v) CHECK(std::abs(p[v] - oracle[v] / z) <= 1e-12);
    CHECK(p[model.vocabulary().mask_id()] == 0.0);
  }
}

TEST_CASE("fixed-length conditionals tolerate masked neighbours") {
  Rng rng(23);
  const auto m = NgramModel::train(random_corpus(rng, 60, 5), 3);
  NgramConditionalModel model(m, 4);
  const TokenId mask = model.vocabulary().mask_id();
  const auto p = model.query(TokenSequence({mask, 1, mask, mask}), 1);
  CHECK(validate_distribution(p).ok);
  CHECK(energy_score(model, TokenSequence({0, 1, 2, 3})).finite());
}
