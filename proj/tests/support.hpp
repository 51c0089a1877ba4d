#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gsnprobe/conditional_model.hpp"
#include "gsnprobe/tabular.hpp"

namespace testing {

inline std::vector<std::string> word_tokens(std::size_t v) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v; ++i) out.push_back("w" + std::to_string(i));
  out.emplace_back("[MASK]");
  out.emplace_back("[UNK]");
  return out;
}

// Uniform over the V ordinary tokens regardless of context.
class UniformModel final : public gsnprobe::ConditionalModel {
 public:
  UniformModel(std::size_t v, std::size_t n) : v_(v), n_(n), vocab_(word_tokens(v)) {}
  const gsnprobe::Vocabulary& vocabulary() const override { return vocab_; }
  std::size_t length() const override { return n_; }
  std::string fingerprint() const override { return "uniform"; }

 protected:
  std::vector<double> conditional_at(const gsnprobe::TokenSequence&, std::size_t) const override {
    std::vector<double> p(vocab_.size(), 0.0);
    for (std::size_t i = 0; i < v_; ++i) p[i] = 1.0 / static_cast<double>(v_);
    return p;
  }

 private:
  std::size_t v_;
  std::size_t n_;
  gsnprobe::Vocabulary vocab_;
};

// Probability one on a single token at every site.
class ConstantModel final : public gsnprobe::ConditionalModel {
 public:
  ConstantModel(std::size_t v, std::size_t n, gsnprobe::TokenId token)
      : n_(n), token_(token), vocab_(word_tokens(v)) {}
  const gsnprobe::Vocabulary& vocabulary() const override { return vocab_; }
  std::size_t length() const override { return n_; }
  std::string fingerprint() const override { return "constant"; }

 protected:
  std::vector<double> conditional_at(const gsnprobe::TokenSequence&, std::size_t) const override {
    std::vector<double> p(vocab_.size(), 0.0);
    p[token_] = 1.0;
    return p;
  }

 private:
  std::size_t n_;
  gsnprobe::TokenId token_;
  gsnprobe::Vocabulary vocab_;
};

// Two-basin network over V=2, n=2: P(00) and P(11) share all but 2c of the
// mass, so every conditional at a basin state is at least 1 - c / P(basin).
inline gsnprobe::tabular::ExactJoint sticky_joint(double c) {
  const double rest = 1.0 - 2.0 * c;
  return gsnprobe::tabular::ExactJoint(gsnprobe::tabular::StateSpace(2, 2),
                                       {0.6 * rest, c, c, 0.4 * rest});
}

inline std::string data_path(const std::string& name) {
  return std::string(GSNPROBE_TEST_DATA) + "/" + name;
}

}  // namespace testing
