#include "gsnprobe/ngram.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "gsnprobe/error.hpp"

namespace gsnprobe::ngram {

std::vector<std::vector<std::string>> split_sentences(std::span<const std::string> lines) {
  std::vector<std::vector<std::string>> out;
  for (const auto& line : lines) {
    std::istringstream in(line);
    std::vector<std::string> words;
    std::string w;
    while (in >> w) words.push_back(w);
    if (!words.empty()) out.push_back(std::move(words));
  }
  return out;
}

NgramModel NgramModel::train(std::span<const std::vector<std::string>> sentences, std::size_t order,
                             double discount) {
  if (order < 1) throw UsageError("n-gram order must be at least 1");
  if (!(discount > 0.0 && discount < 1.0)) throw UsageError("discount must lie in (0, 1)");
  NgramModel m;
  m.order_ = order;
  m.discount_ = discount;
  for (const auto& s : sentences) {
    for (const auto& w : s) {
      if (m.index_.emplace(w, static_cast<WordId>(m.words_.size())).second) m.words_.push_back(w);
    }
  }
  if (m.words_.empty()) throw UsageError("cannot train an n-gram model on an empty corpus");

  std::vector<Level> raw(order);
  const WordId bos = m.bos();
  for (const auto& s : sentences) {
    std::vector<WordId> padded(order - 1, bos);
    for (const auto& w : s) padded.push_back(m.index_.at(w));
    for (std::size_t i = order - 1; i < padded.size(); ++i) {
      for (std::size_t j = 0; j < order; ++j) {
        std::vector<WordId> ctx(padded.begin() + static_cast<std::ptrdiff_t>(i - j),
                                padded.begin() + static_cast<std::ptrdiff_t>(i));
        auto& cc = raw[j][ctx];
        ++cc.next[padded[i]];
        ++cc.total;
      }
    }
  }

  m.counts_.assign(order, Level{});
  m.counts_[order - 1] = raw[order - 1];
  for (std::size_t j = 0; j + 1 < order; ++j) {
    auto& level = m.counts_[j];
    // Contexts anchored at the sentence start cannot be extended to the
    // left, so they keep their raw counts.
    for (const auto& [ctx, cc] : raw[j]) {
      if (!ctx.empty() && ctx.front() == bos) level[ctx] = cc;
    }
    for (const auto& [ctx, cc] : raw[j + 1]) {
      if (ctx.front() == bos) continue;
      std::vector<WordId> shorter(ctx.begin() + 1, ctx.end());
      auto& target = level[shorter];
      for (const auto& [w, c] : cc.next) {
        ++target.next[w];
        ++target.total;
      }
    }
  }
  return m;
}

std::optional<WordId> NgramModel::id(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void NgramModel::interpolate(std::span<const WordId> context, std::size_t level,
                             std::vector<double>& out) const {
  const double w = static_cast<double>(words_.size());
  const ContextCounts* cc = nullptr;
  if (level == 0) {
    auto it = counts_[0].find({});
    if (it != counts_[0].end()) cc = &it->second;
    out.assign(words_.size(), 1.0 / w);
  } else {
    interpolate(context.subspan(1), level - 1, out);
    auto it = counts_[level].find(std::vector<WordId>(context.begin(), context.end()));
    if (it != counts_[level].end()) cc = &it->second;
  }
  if (cc == nullptr || cc->total == 0) return;
  const double total = static_cast<double>(cc->total);
  const double lambda = discount_ * static_cast<double>(cc->next.size()) / total;
  for (auto& p : out) p *= lambda;
  for (const auto& [word, c] : cc->next) {
    out[word] += std::max(static_cast<double>(c) - discount_, 0.0) / total;
  }
}

std::vector<double> NgramModel::distribution(std::span<const WordId> context) const {
  const std::size_t len = std::min(context.size(), order_ - 1);
  std::vector<double> out;
  interpolate(context.subspan(context.size() - len), len, out);
  return out;
}

double NgramModel::probability(std::span<const WordId> context, WordId word) const {
  if (word >= words_.size()) throw UsageError("probability: word id out of range");
  const std::size_t len = std::min(context.size(), order_ - 1);
  context = context.subspan(context.size() - len);
  double p = 1.0 / static_cast<double>(words_.size());
  for (std::size_t level = 0; level <= len; ++level) {
    auto ctx = context.subspan(len - level);
    auto it = counts_[level].find(std::vector<WordId>(ctx.begin(), ctx.end()));
    if (it == counts_[level].end() || it->second.total == 0) continue;
    const auto& cc = it->second;
    const double total = static_cast<double>(cc.total);
    const double lambda = discount_ * static_cast<double>(cc.next.size()) / total;
    auto hit = cc.next.find(word);
    const double c = hit == cc.next.end() ? 0.0 : static_cast<double>(hit->second);
    p = std::max(c - discount_, 0.0) / total + lambda * p;
  }
  return p;
}

std::vector<WordId> NgramModel::sentence_context(std::span<const WordId> prefix) const {
  std::vector<WordId> ctx(order_ - 1, bos());
  ctx.insert(ctx.end(), prefix.begin(), prefix.end());
  return std::vector<WordId>(ctx.end() - static_cast<std::ptrdiff_t>(order_ - 1), ctx.end());
}

std::vector<WordId> NgramModel::sample(std::size_t length, Rng& rng) const {
  std::vector<WordId> out;
  out.reserve(length);
  for (std::size_t i = 0; i < length; ++i) {
    const auto p = distribution(sentence_context(out));
    out.push_back(static_cast<WordId>(rng.categorical(p)));
  }
  return out;
}

std::vector<std::string> NgramModel::sample_words(std::size_t length, Rng& rng) const {
  std::vector<std::string> out;
  for (auto id : sample(length, rng)) out.push_back(words_[id]);
  return out;
}

nlohmann::json NgramModel::to_json() const {
  nlohmann::json j;
  j["format"] = "gsnprobe-kn";
  j["order"] = order_;
  j["discount"] = discount_;
  j["words"] = words_;
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& level : counts_) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [ctx, cc] : level) {
      nlohmann::json next = nlohmann::json::array();
      for (const auto& [w, c] : cc.next) next.push_back({w, c});
      entries.push_back({{"context", ctx}, {"next", std::move(next)}});
    }
    levels.push_back(std::move(entries));
  }
  j["levels"] = std::move(levels);
  return j;
}

NgramModel NgramModel::from_json(const nlohmann::json& j) {
  try {
    NgramModel m;
    m.order_ = j.at("order").get<std::size_t>();
    m.discount_ = j.at("discount").get<double>();
    m.words_ = j.at("words").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < m.words_.size(); ++i) m.index_.emplace(m.words_[i], static_cast<WordId>(i));
    const auto& levels = j.at("levels");
    if (levels.size() != m.order_) throw FormatError("n-gram model: wrong number of levels");
    for (const auto& level : levels) {
      Level lv;
      for (const auto& e : level) {
        auto& cc = lv[e.at("context").get<std::vector<WordId>>()];
        for (const auto& pair : e.at("next")) {
          const auto w = pair.at(0).get<WordId>();
          const auto c = pair.at(1).get<std::uint64_t>();
          if (w >= m.words_.size()) throw FormatError("n-gram model: word id out of range");
          cc.next[w] = c;
          cc.total += c;
        }
      }
      m.counts_.push_back(std::move(lv));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed n-gram model: ") + e.what());
  }
}

void NgramModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << to_json().dump() << '\n';
}

NgramModel NgramModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open n-gram model " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return from_json(j);
}

}  // namespace gsnprobe::ngram
