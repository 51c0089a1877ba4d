#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gsnprobe {

using TokenId = std::uint32_t;

inline constexpr std::string_view kDefaultMaskToken = "[MASK]";
inline constexpr std::string_view kDefaultUnkToken = "[UNK]";

// Ordered token list; a token's id is its position.
class Vocabulary {
 public:
  Vocabulary(std::vector<std::string> tokens,
             std::string_view mask_token = kDefaultMaskToken,
             std::string_view unk_token = kDefaultUnkToken);

  // One token per line, line index = id.
  static Vocabulary load(const std::filesystem::path& path,
                         std::string_view mask_token = kDefaultMaskToken,
                         std::string_view unk_token = kDefaultUnkToken);
  void save(const std::filesystem::path& path) const;

  std::size_t size() const { return tokens_.size(); }
  TokenId mask_id() const { return mask_id_; }
  TokenId unk_id() const { return unk_id_; }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::optional<TokenId> find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }

  // Stable content hash over the token list and special ids.
  std::uint64_t fingerprint() const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId mask_id_ = 0;
  TokenId unk_id_ = 0;
};

// Fixed-length chain state. Ids may change; the length never does.
class TokenSequence {
 public:
  TokenSequence() = default;
  explicit TokenSequence(std::vector<TokenId> ids) : ids_(std::move(ids)) {}
  TokenSequence(std::initializer_list<TokenId> ids) : ids_(ids) {}
  TokenSequence(std::size_t n, TokenId fill) : ids_(n, fill) {}

  std::size_t size() const { return ids_.size(); }
  TokenId operator[](std::size_t i) const { return ids_[i]; }
  TokenId& operator[](std::size_t i) { return ids_[i]; }
  TokenId at(std::size_t i) const { return ids_.at(i); }
  std::span<const TokenId> ids() const { return ids_; }
  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }

  bool operator==(const TokenSequence&) const = default;

 private:
  std::vector<TokenId> ids_;
};

// Throws UsageError if any id is outside the vocabulary.
void check_ids(const Vocabulary& vocab, const TokenSequence& seq);

}  // namespace gsnprobe
