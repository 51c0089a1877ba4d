#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gsnprobe/vocabulary.hpp"

namespace gsnprobe::wordpiece {

inline constexpr std::string_view kContinuationPrefix = "##";

struct TokenizerOptions {
  bool lowercase = true;           // ASCII letters only
  std::size_t max_input_chars = 100;  // per word, in code points
};

// Greedy longest-match-first subword tokenizer.
class Tokenizer {
 public:
  explicit Tokenizer(Vocabulary vocab, TokenizerOptions options = {});

  const Vocabulary& vocabulary() const { return vocab_; }
  const TokenizerOptions& options() const { return options_; }

  // Whitespace split with ASCII punctuation isolated into its own word.
  std::vector<std::string> pre_tokenize(std::string_view text) const;

  // One word; falls back to a single [UNK] when any suffix is unmatched or
  // the word is too long.
  std::vector<TokenId> tokenize_word(std::string_view word) const;
  std::vector<TokenId> tokenize(std::string_view text) const;

  std::string detokenize(std::span<const TokenId> ids) const;

 private:
  Vocabulary vocab_;
  TokenizerOptions options_;
};

// Joins word starts with single spaces and glues "##" pieces onto the
// previous piece.
std::string detokenize(const Vocabulary& vocab, std::span<const TokenId> ids);

// Byte offsets of UTF-8 code point starts, plus the end offset.
std::vector<std::size_t> code_point_boundaries(std::string_view s);

}  // namespace gsnprobe::wordpiece
