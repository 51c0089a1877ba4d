#include "gsnprobe/corpus_stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <set>
#include <sstream>

#include "gsnprobe/error.hpp"

namespace gsnprobe::stats {

FrequencyTable::FrequencyTable(std::map<std::string, std::uint64_t> counts) {
  for (auto& [label, c] : counts) add(label, c);
}

void FrequencyTable::add(const std::string& label, std::uint64_t count) {
  if (count == 0) return;
  counts_[label] += count;
  total_ += count;
}

std::uint64_t FrequencyTable::count(const std::string& label) const {
  auto it = counts_.find(label);
  return it == counts_.end() ? 0 : it->second;
}

double FrequencyTable::relative(const std::string& label) const {
  return total_ == 0 ? 0.0 : static_cast<double>(count(label)) / static_cast<double>(total_);
}

std::vector<double> descending_midranks(std::span<const double> values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && values[idx[j + 1]] == values[idx[i]]) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = mid;
    i = j + 1;
  }
  return ranks;
}

std::map<std::string, double> FrequencyTable::ranks() const {
  std::vector<double> values;
  values.reserve(counts_.size());
  for (const auto& [label, c] : counts_) values.push_back(static_cast<double>(c));
  auto r = descending_midranks(values);
  std::map<std::string, double> out;
  std::size_t i = 0;
  for (const auto& [label, c] : counts_) out[label] = r[i++];
  return out;
}

namespace {

double pearson(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nan("");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

RankCorrelation spearman_rank_correlation(const FrequencyTable& a, const FrequencyTable& b,
                                          std::uint64_t min_count) {
  std::vector<double> ca, cb;
  for (const auto& [label, count] : a.counts()) {
    const auto other = b.count(label);
    if (count >= min_count && other >= min_count && other > 0) {
      ca.push_back(static_cast<double>(count));
      cb.push_back(static_cast<double>(other));
    }
  }
  RankCorrelation out;
  out.shared = ca.size();
  if (ca.size() < 3) {
    out.reason = "fewer than 3 shared labels";
    return out;
  }
  const auto ra = descending_midranks(ca), rb = descending_midranks(cb);
  const double rho = pearson(ra, rb);
  if (std::isnan(rho)) {
    out.reason = "all shared labels tie in one table";
    return out;
  }
  out.rho = rho;
  return out;
}

ZipfTable zipf_table(const FrequencyTable& a, const FrequencyTable& b) {
  ZipfTable out;
  std::vector<std::string> labels;
  std::vector<double> ca, cb;
  for (const auto& [label, count] : a.counts()) {
    if (b.count(label) > 0) {
      labels.push_back(label);
      ca.push_back(static_cast<double>(count));
      cb.push_back(static_cast<double>(b.count(label)));
    }
  }
  if (labels.empty()) {
    out.warnings.push_back("tables share no labels");
    return out;
  }
  const auto ra = descending_midranks(ca), rb = descending_midranks(cb);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out.rows.push_back({labels[i], ra[i], a.relative(labels[i]), rb[i], b.relative(labels[i])});
  }
  std::stable_sort(out.rows.begin(), out.rows.end(), [](const ZipfRow& x, const ZipfRow& y) {
    return x.rank_a < y.rank_a || (x.rank_a == y.rank_a && x.label < y.label);
  });
  return out;
}

double zipf_slope(const FrequencyTable& table, std::size_t max_rank) {
  std::vector<double> counts;
  for (const auto& [label, c] : table.counts()) counts.push_back(static_cast<double>(c));
  std::sort(counts.begin(), counts.end(), std::greater<>());
  const std::size_t m = std::min(max_rank, counts.size());
  if (m < 2) throw UsageError("zipf_slope needs at least two labels");
  std::vector<double> x(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    x[i] = std::log(static_cast<double>(i + 1));
    y[i] = std::log(counts[i] / static_cast<double>(table.total()));
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(m);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(m);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

std::vector<RatioRow> production_ratio(const FrequencyTable& a, const FrequencyTable& b,
                                       double smoothing) {
  if (smoothing < 0.0) throw UsageError("smoothing must be nonnegative");
  std::set<std::string> labels;
  for (const auto& [l, c] : a.counts()) labels.insert(l);
  for (const auto& [l, c] : b.counts()) labels.insert(l);
  std::vector<RatioRow> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    out.push_back({l, std::log((a.relative(l) + smoothing) / (b.relative(l) + smoothing))});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RatioRow& x, const RatioRow& y) { return x.log_ratio > y.log_ratio; });
  return out;
}

// ------------------------------------------------------------------ CoNLL-U

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    cols.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cols;
}

std::optional<std::size_t> parse_index(std::string_view s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

std::optional<std::string> tree_violation(const ParsedSentence& s) {
  const std::size_t n = s.tokens.size();
  std::size_t roots = 0;
  for (const auto& t : s.tokens) {
    if (t.head > n) return "head " + std::to_string(t.head) + " out of range";
    if (t.head == t.id) return "token " + std::to_string(t.id) + " heads itself";
    if (t.head == 0) ++roots;
  }
  if (roots != 1) return "expected exactly one root, found " + std::to_string(roots);
  for (const auto& t : s.tokens) {
    std::size_t cur = t.id, steps = 0;
    while (cur != 0) {
      cur = s.tokens[cur - 1].head;
      if (++steps > n) return "cycle through token " + std::to_string(t.id);
    }
  }
  return std::nullopt;
}

ConlluDocument ingest_conllu(std::istream& in, const std::string& name) {
  ConlluDocument doc;
  ParsedSentence cur;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) {
    throw FormatError(name + ":" + std::to_string(lineno) + ": " + why);
  };
  auto finish = [&] {
    if (cur.tokens.empty()) return;
    if (auto why = tree_violation(cur)) {
      doc.rejected.push_back({cur.line, *why});
    } else {
      doc.sentences.push_back(std::move(cur));
    }
    cur = ParsedSentence{};
  };
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      finish();
      continue;
    }
    if (line.front() == '#') continue;
    const auto cols = split_tabs(line);
    if (cols.size() != 10) fail("expected 10 tab-separated columns, found " + std::to_string(cols.size()));
    if (cols[0].find('-') != std::string_view::npos || cols[0].find('.') != std::string_view::npos) {
      continue;
    }
    auto id = parse_index(cols[0]);
    if (!id) fail("bad token id '" + std::string(cols[0]) + "'");
    if (*id != cur.tokens.size() + 1) fail("token ids must be consecutive from 1");
    auto head = parse_index(cols[6]);
    if (!head) fail("bad head '" + std::string(cols[6]) + "'");
    if (cur.tokens.empty()) cur.line = lineno;
    cur.tokens.push_back({*id, std::string(cols[1]), std::string(cols[3]), *head, std::string(cols[7])});
  }
  finish();
  return doc;
}

ConlluDocument ingest_conllu(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return ingest_conllu(in, path.string());
}

DependencyLengths dependency_lengths(const ParsedSentence& s) {
  DependencyLengths out;
  for (const auto& t : s.tokens) {
    if (t.head == 0) continue;
    out.distances.push_back(t.head > t.id ? t.head - t.id : t.id - t.head);
  }
  if (!out.distances.empty()) {
    double sum = 0.0;
    for (auto d : out.distances) sum += static_cast<double>(d);
    out.mean = sum / static_cast<double>(out.distances.size());
  }
  return out;
}

std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> values) {
  std::vector<std::pair<double, double>> out;
  if (values.empty()) return out;
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
    out.emplace_back(values[i], static_cast<double>(i + 1) / n);
  }
  out.back().second = 1.0;
  return out;
}

FrequencyTable label_counts(std::span<const ParsedSentence> sentences, LabelKind kind) {
  FrequencyTable t;
  for (const auto& s : sentences) {
    for (const auto& tok : s.tokens) t.add(kind == LabelKind::kPos ? tok.upos : tok.deprel);
  }
  return t;
}

std::vector<LabelRow> label_frequency_comparison(std::span<const ParsedSentence> a,
                                                 std::span<const ParsedSentence> b,
                                                 LabelKind kind) {
  const auto ta = label_counts(a, kind), tb = label_counts(b, kind);
  if (ta.empty() || tb.empty()) throw UsageError("label comparison needs two nonempty parse sets");
  std::set<std::string> labels;
  for (const auto& [l, c] : ta.counts()) labels.insert(l);
  for (const auto& [l, c] : tb.counts()) labels.insert(l);
  std::vector<LabelRow> rows;
  for (const auto& l : labels) {
    const double fa = ta.relative(l), fb = tb.relative(l);
    rows.push_back({l, fa, fb, fa - fb});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const LabelRow& x, const LabelRow& y) {
    return std::abs(x.difference) > std::abs(y.difference);
  });
  return rows;
}

}  // namespace gsnprobe::stats
