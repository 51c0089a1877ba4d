#include "gsnprobe/vocabulary.hpp"

#include <fstream>

#include "gsnprobe/error.hpp"
#include "gsnprobe/hash.hpp"

namespace gsnprobe {

Vocabulary::Vocabulary(std::vector<std::string> tokens,
                       std::string_view mask_token,
                       std::string_view unk_token)
    : tokens_(std::move(tokens)) {
  if (tokens_.empty()) throw UsageError("vocabulary is empty");
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    auto [it, inserted] = index_.emplace(tokens_[i], static_cast<TokenId>(i));
    if (!inserted) {
      throw FormatError("duplicate token '" + tokens_[i] + "' at ids " +
                        std::to_string(it->second) + " and " + std::to_string(i));
    }
  }
  auto mask = find(mask_token);
  auto unk = find(unk_token);
  if (!mask) throw FormatError("mask token '" + std::string(mask_token) + "' missing from vocabulary");
  if (!unk) throw FormatError("unk token '" + std::string(unk_token) + "' missing from vocabulary");
  mask_id_ = *mask;
  unk_id_ = *unk;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path,
                            std::string_view mask_token,
                            std::string_view unk_token) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open vocabulary file " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return Vocabulary(std::move(tokens), mask_token, unk_token);
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  for (const auto& t : tokens_) out << t << '\n';
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t Vocabulary::fingerprint() const {
  Fnv1a h;
  for (const auto& t : tokens_) {
    h.update(t);
    h.update(std::string_view("\n", 1));
  }
  h.update_u64(mask_id_);
  h.update_u64(unk_id_);
  return h.digest();
}

void check_ids(const Vocabulary& vocab, const TokenSequence& seq) {
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq[i] >= vocab.size()) {
      throw UsageError("token id " + std::to_string(seq[i]) + " at site " +
                       std::to_string(i) + " exceeds vocabulary size " +
                       std::to_string(vocab.size()));
    }
  }
}

}  // namespace gsnprobe
