#include "gsnprobe/wordpiece.hpp"

#include <cctype>

#include "gsnprobe/error.hpp"

namespace gsnprobe::wordpiece {

namespace {

bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }

}  // namespace

std::vector<std::size_t> code_point_boundaries(std::string_view s) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) out.push_back(i);
  }
  out.push_back(s.size());
  return out;
}

Tokenizer::Tokenizer(Vocabulary vocab, TokenizerOptions options)
    : vocab_(std::move(vocab)), options_(options) {}

std::vector<std::string> Tokenizer::pre_tokenize(std::string_view text) const {
  std::vector<std::string> words;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) words.push_back(std::move(cur));
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_ascii_space(c)) {
      flush();
    } else if (is_ascii_punct(c)) {
      flush();
      words.emplace_back(1, ch);
    } else if (c < 0x20 || c == 0x7f) {
      // control characters are dropped
    } else {
      cur.push_back(options_.lowercase && c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    }
  }
  flush();
  return words;
}

std::vector<TokenId> Tokenizer::tokenize_word(std::string_view word) const {
  const auto bounds = code_point_boundaries(word);
  const std::size_t chars = bounds.size() - 1;
  if (chars == 0) return {};
  if (chars > options_.max_input_chars) return {vocab_.unk_id()};

  std::vector<TokenId> pieces;
  std::string candidate;
  std::size_t start = 0;  // index into bounds
  while (start < chars) {
    std::size_t end = chars;
    std::optional<TokenId> match;
    while (end > start) {
      candidate.clear();
      if (start > 0) candidate = kContinuationPrefix;
      candidate.append(word.substr(bounds[start], bounds[end] - bounds[start]));
      match = vocab_.find(candidate);
      if (match) break;
      --end;
    }
    if (!match) return {vocab_.unk_id()};
    pieces.push_back(*match);
    start = end;
  }
  return pieces;
}

std::vector<TokenId> Tokenizer::tokenize(std::string_view text) const {
  std::vector<TokenId> out;
  for (const auto& word : pre_tokenize(text)) {
    auto pieces = tokenize_word(word);
    out.insert(out.end(), pieces.begin(), pieces.end());
  }
  return out;
}

std::string Tokenizer::detokenize(std::span<const TokenId> ids) const {
  return wordpiece::detokenize(vocab_, ids);
}

std::string detokenize(const Vocabulary& vocab, std::span<const TokenId> ids) {
  std::string out;
  for (auto id : ids) {
    if (id >= vocab.size()) throw UsageError("detokenize: id " + std::to_string(id) + " out of range");
    std::string_view tok = vocab.token(id);
    if (tok.starts_with(kContinuationPrefix)) {
      out.append(tok.substr(kContinuationPrefix.size()));
    } else {
      if (!out.empty()) out.push_back(' ');
      out.append(tok);
    }
  }
  return out;
}

}  // namespace gsnprobe::wordpiece
