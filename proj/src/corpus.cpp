#include "gsnprobe/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <thread>

#include "json.hpp"

#include "gsnprobe/error.hpp"
#include "gsnprobe/hash.hpp"

namespace gsnprobe::corpus {

namespace {

constexpr std::array<std::string_view, 22> kAbbreviations = {
    "mr", "mrs", "ms", "dr", "prof", "st", "jr", "sr", "vs", "etc", "inc",
    "ltd", "co", "corp", "no", "vol", "fig", "e.g", "i.e", "gen", "col", "mt"};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

bool is_abbreviation(std::string_view word) {
  std::string lower;
  for (char c : word) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower.size() == 1 && std::isalpha(static_cast<unsigned char>(lower[0]))) return true;
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), lower) != kAbbreviations.end();
}

}  // namespace

std::string to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::kNone: return "keep";
    case RejectReason::kEmpty: return "empty";
    case RejectReason::kPipe: return "pipe";
    case RejectReason::kTerminalColon: return "terminal-colon";
    case RejectReason::kTerminalSemicolon: return "terminal-semicolon";
    case RejectReason::kMultipleSentences: return "multiple-sentences";
    case RejectReason::kDenylisted: return "denylisted";
  }
  return "unknown";
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool looks_like_multiple_sentences(std::string_view text) {
  text = trim(text);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t j = i + 1;
    while (j < text.size() && (text[j] == '"' || text[j] == '\'' || text[j] == ')')) ++j;
    if (j >= text.size() || !is_space(text[j])) continue;
    while (j < text.size() && is_space(text[j])) ++j;
    while (j < text.size() && (text[j] == '"' || text[j] == '\'' || text[j] == '(')) ++j;
    if (j >= text.size() || !is_upper(text[j])) continue;
    if (c == '.') {
      std::size_t start = i;
      while (start > 0 && !is_space(text[start - 1])) --start;
      std::string_view word = text.substr(start, i - start);
      while (!word.empty() && !std::isalnum(static_cast<unsigned char>(word.front()))) {
        word.remove_prefix(1);
      }
      if (!word.empty() && is_abbreviation(word)) continue;
    }
    return true;
  }
  return false;
}

FilterResult filter_sentence(std::string_view text, const FilterOptions& options) {
  text = trim(text);
  if (text.empty()) return {RejectReason::kEmpty};
  if (text.find('|') != std::string_view::npos) return {RejectReason::kPipe};
  if (text.back() == ':') return {RejectReason::kTerminalColon};
  if (text.back() == ';') return {RejectReason::kTerminalSemicolon};
  if (looks_like_multiple_sentences(text)) return {RejectReason::kMultipleSentences};
  if (!options.denylist.empty() && options.denylist.count(std::string(text))) {
    return {RejectReason::kDenylisted};
  }
  return {};
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::unordered_set<std::string> load_denylist(const std::filesystem::path& path) {
  std::unordered_set<std::string> out;
  for (const auto& line : read_lines(path)) {
    auto t = trim(line);
    if (!t.empty()) out.emplace(t);
  }
  return out;
}

SentencePool build_pool(std::span<const std::string> lines, const wordpiece::Tokenizer& tokenizer,
                        const std::set<std::size_t>& lengths, std::string source,
                        const FilterOptions& options, std::size_t shards) {
  struct LineResult {
    RejectReason reason = RejectReason::kNone;
    std::size_t length = 0;
  };
  std::vector<LineResult> results(lines.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto verdict = filter_sentence(lines[i], options);
      results[i].reason = verdict.reason;
      if (verdict.keep()) results[i].length = tokenizer.tokenize(trim(lines[i])).size();
    }
  };
  shards = std::clamp<std::size_t>(shards, 1, std::max<std::size_t>(1, lines.size()));
  if (shards == 1) {
    work(0, lines.size());
  } else {
    std::vector<std::jthread> threads;
    const std::size_t chunk = (lines.size() + shards - 1) / shards;
    for (std::size_t begin = 0; begin < lines.size(); begin += chunk) {
      threads.emplace_back(work, begin, std::min(lines.size(), begin + chunk));
    }
  }

  SentencePool pool;
  pool.source = std::move(source);
  pool.lines_read = lines.size();
  for (auto n : lengths) pool.buckets[n];
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& r = results[i];
    if (r.reason != RejectReason::kNone) {
      ++pool.rejected[to_string(r.reason)];
      continue;
    }
    ++pool.length_histogram[r.length];
    if (lengths.count(r.length)) pool.buckets[r.length].emplace_back(trim(lines[i]));
  }
  for (const auto& [n, sentences] : pool.buckets) {
    if (sentences.empty()) {
      pool.warnings.push_back("no sentences of " + std::to_string(n) + " tokens");
    }
  }
  return pool;
}

void write_pool(const SentencePool& pool, const std::filesystem::path& dir,
                const wordpiece::Tokenizer& tokenizer) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["source"] = pool.source;
  manifest["lines_read"] = pool.lines_read;
  manifest["vocab_fingerprint"] = hex64(tokenizer.vocabulary().fingerprint());
  manifest["lowercase"] = tokenizer.options().lowercase;
  manifest["rejected"] = pool.rejected;
  manifest["warnings"] = pool.warnings;
  nlohmann::json buckets = nlohmann::json::array();
  for (const auto& [n, sentences] : pool.buckets) {
    const std::string name = "pool_len" + std::to_string(n) + ".txt";
    {
      std::ofstream out(dir / name);
      if (!out) throw FormatError("cannot write " + (dir / name).string());
      for (const auto& s : sentences) out << s << '\n';
    }
    buckets.push_back({{"length", n},
                       {"file", name},
                       {"count", sentences.size()},
                       {"hash", hash_file(dir / name)}});
  }
  manifest["buckets"] = std::move(buckets);
  {
    std::ofstream out(dir / "length_histogram.csv");
    out << "length,count\n";
    for (const auto& [n, count] : pool.length_histogram) out << n << ',' << count << '\n';
  }
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

SentencePool load_pool(const std::filesystem::path& dir, const wordpiece::Tokenizer& tokenizer) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw FormatError("pool manifest missing in " + dir.string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed pool manifest: " + std::string(e.what()));
  }
  SentencePool pool;
  pool.source = manifest.value("source", "");
  pool.lines_read = manifest.value("lines_read", std::size_t{0});
  for (const auto& b : manifest.at("buckets")) {
    const auto n = b.at("length").get<std::size_t>();
    auto& bucket = pool.buckets[n];
    for (const auto& s : read_lines(dir / b.at("file").get<std::string>())) {
      if (s.empty()) continue;
      if (auto verdict = filter_sentence(s); !verdict.keep()) {
        throw FormatError("pooled sentence fails the " + to_string(verdict.reason) +
                          " filter: " + s);
      }
      if (tokenizer.tokenize(s).size() != n) {
        throw FormatError("pooled sentence does not tokenize to " + std::to_string(n) +
                          " tokens: " + s);
      }
      bucket.push_back(s);
    }
  }
  return pool;
}

}  // namespace gsnprobe::corpus
