#include <algorithm>
#include <cmath>

#include "gsnprobe/error.hpp"
#include "gsnprobe/hash.hpp"
#include "gsnprobe/ngram.hpp"

namespace gsnprobe::ngram {

namespace {

std::vector<std::string> chain_tokens(const NgramModel& model) {
  std::vector<std::string> tokens = model.words();
  tokens.emplace_back(kDefaultMaskToken);
  tokens.emplace_back(kDefaultUnkToken);
  return tokens;
}

}  // namespace

NgramConditionalModel::NgramConditionalModel(NgramModel model, std::size_t length)
    : model_(std::move(model)), length_(length), vocab_(chain_tokens(model_)) {
  if (length_ == 0) throw UsageError("chain length must be positive");
}

std::string NgramConditionalModel::fingerprint() const {
  Fnv1a h;
  h.update(model_.to_json().dump());
  h.update_u64(length_);
  return "ngram:" + hex64(h.digest());
}

std::vector<WordId> NgramConditionalModel::context_for(const std::vector<WordId>& words,
                                                       std::size_t position) const {
  const std::size_t width = model_.order() - 1;
  std::vector<WordId> ctx;
  for (std::size_t back = width; back >= 1; --back) {
    ctx.push_back(position >= back ? words[position - back] : model_.bos());
  }
  auto last_unknown = std::find(ctx.rbegin(), ctx.rend(), model_.unknown());
  if (last_unknown != ctx.rend()) ctx.erase(ctx.begin(), last_unknown.base());
  return ctx;
}

std::vector<double> NgramConditionalModel::conditional_at(const TokenSequence& masked,
                                                          std::size_t site) const {
  const std::size_t w = model_.vocab_size();
  std::vector<WordId> words(masked.size());
  for (std::size_t i = 0; i < masked.size(); ++i) {
    words[i] = masked[i] < w ? masked[i] : model_.unknown();
  }
  const std::size_t last = std::min(length_ - 1, site + model_.order() - 1);
  std::vector<double> scores(w);
  for (std::size_t v = 0; v < w; ++v) {
    words[site] = static_cast<WordId>(v);
    double s = 0.0;
    for (std::size_t j = site; j <= last; ++j) {
      if (words[j] == model_.unknown()) continue;
      s += std::log(model_.probability(context_for(words, j), words[j]));
    }
    scores[v] = s;
  }
  const double top = *std::max_element(scores.begin(), scores.end());
  std::vector<double> out(vocab_.size(), 0.0);
  double z = 0.0;
  for (std::size_t v = 0; v < w; ++v) {
    out[v] = std::exp(scores[v] - top);
    z += out[v];
  }
  for (std::size_t v = 0; v < w; ++v) out[v] /= z;
  return out;
}

}  // namespace gsnprobe::ngram
