#pragma once

// Word-level interpolated Kneser-Ney n-gram model with left-to-right
// sentence sampling, plus a ConditionalModel view for fixed-length chains.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "gsnprobe/conditional_model.hpp"
#include "gsnprobe/rng.hpp"

namespace gsnprobe::ngram {

using WordId = std::uint32_t;

std::vector<std::vector<std::string>> split_sentences(std::span<const std::string> lines);

class NgramModel {
 public:
  // Sentences are padded on the left with order-1 sentence-start symbols;
  // there is no end-of-sentence symbol.
  static NgramModel train(std::span<const std::vector<std::string>> sentences,
                          std::size_t order = 5, double discount = 0.75);

  std::size_t order() const { return order_; }
  double discount() const { return discount_; }
  const std::vector<std::string>& words() const { return words_; }
  std::size_t vocab_size() const { return words_.size(); }
  std::optional<WordId> id(const std::string& word) const;

  // History symbol for "before the sentence start".
  WordId bos() const { return static_cast<WordId>(words_.size()); }
  // History symbol for unknown or masked words; never seen in training.
  WordId unknown() const { return static_cast<WordId>(words_.size() + 1); }

  // P(w | context). Only the last order-1 context entries are used; a
  // shorter context is evaluated at the matching lower order. Include bos()
  // entries to condition on the sentence start.
  double probability(std::span<const WordId> context, WordId word) const;
  std::vector<double> distribution(std::span<const WordId> context) const;

  // Context for predicting the word after `prefix` in a sentence.
  std::vector<WordId> sentence_context(std::span<const WordId> prefix) const;

  // Ancestral left-to-right sampling of exactly `length` words.
  std::vector<WordId> sample(std::size_t length, Rng& rng) const;
  std::vector<std::string> sample_words(std::size_t length, Rng& rng) const;

  nlohmann::json to_json() const;
  static NgramModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static NgramModel load(const std::filesystem::path& path);

 private:
  struct ContextCounts {
    std::map<WordId, std::uint64_t> next;
    std::uint64_t total = 0;
  };
  // counts_[j] holds (j+1)-grams keyed by their j-word context. The top
  // order stores raw counts; lower orders store continuation counts,
  // except for contexts that begin at the sentence start.
  using Level = std::map<std::vector<WordId>, ContextCounts>;

  void interpolate(std::span<const WordId> context, std::size_t level, std::vector<double>& out) const;

  std::size_t order_ = 5;
  double discount_ = 0.75;
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> index_;
  std::vector<Level> counts_;
};

// Fixed-length chain backend over the n-gram joint: the conditional for a
// site multiplies the probabilities of every n-gram that covers it.
// Masked positions are marginalized: terms predicting them are dropped and
// contexts are cut after the last masked position.
class NgramConditionalModel final : public ConditionalModel {
 public:
  NgramConditionalModel(NgramModel model, std::size_t length);

  const Vocabulary& vocabulary() const override { return vocab_; }
  std::size_t length() const override { return length_; }
  std::string fingerprint() const override;
  const NgramModel& model() const { return model_; }

 protected:
  std::vector<double> conditional_at(const TokenSequence& masked, std::size_t site) const override;

 private:
  std::vector<WordId> context_for(const std::vector<WordId>& words, std::size_t position) const;

  NgramModel model_;
  std::size_t length_;
  Vocabulary vocab_;
};

}  // namespace gsnprobe::ngram
