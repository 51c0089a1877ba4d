#pragma once

// Corpus preparation: sentence rejection filters and length-matched pools.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "gsnprobe/wordpiece.hpp"

namespace gsnprobe::corpus {

enum class RejectReason {
  kNone,
  kEmpty,
  kPipe,
  kTerminalColon,
  kTerminalSemicolon,
  kMultipleSentences,
  kDenylisted,
};

std::string to_string(RejectReason reason);

struct FilterResult {
  RejectReason reason = RejectReason::kNone;
  bool keep() const { return reason == RejectReason::kNone; }
};

struct FilterOptions {
  // Exact (whitespace-trimmed) sentences to drop.
  std::unordered_set<std::string> denylist;
};

// Terminal punctuation followed by whitespace and a capitalized word, not
// preceded by a known abbreviation or a single-letter initial.
bool looks_like_multiple_sentences(std::string_view text);

FilterResult filter_sentence(std::string_view text, const FilterOptions& options = {});

std::unordered_set<std::string> load_denylist(const std::filesystem::path& path);
std::vector<std::string> read_lines(const std::filesystem::path& path);
std::string_view trim(std::string_view s);

struct SentencePool {
  std::string source;
  std::map<std::size_t, std::vector<std::string>> buckets;  // token length -> sentences
  std::map<std::size_t, std::size_t> length_histogram;      // over every kept sentence
  std::map<std::string, std::size_t> rejected;              // reason -> count
  std::size_t lines_read = 0;
  std::vector<std::string> warnings;
};

// Filters, tokenizes and buckets one-sentence-per-line input. Work is split
// across `shards` threads; output order always follows input order.
SentencePool build_pool(std::span<const std::string> lines, const wordpiece::Tokenizer& tokenizer,
                        const std::set<std::size_t>& lengths, std::string source,
                        const FilterOptions& options = {}, std::size_t shards = 1);

// Writes manifest.json, pool_len<N>.txt per bucket and length_histogram.csv.
void write_pool(const SentencePool& pool, const std::filesystem::path& dir,
                const wordpiece::Tokenizer& tokenizer);

// Reads a pool directory and re-checks every sentence against the filters
// and its bucket length; throws FormatError on the first violation.
SentencePool load_pool(const std::filesystem::path& dir, const wordpiece::Tokenizer& tokenizer);

}  // namespace gsnprobe::corpus
