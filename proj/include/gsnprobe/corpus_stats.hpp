#pragma once

// Distributional comparisons between a sample set and a reference corpus.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gsnprobe::stats {

// label -> count. Rank 1 is the most frequent label; ties share the
// average of the ranks they span.
class FrequencyTable {
 public:
  FrequencyTable() = default;
  explicit FrequencyTable(std::map<std::string, std::uint64_t> counts);

  template <typename Range>
  static FrequencyTable from_labels(const Range& labels) {
    FrequencyTable t;
    for (const auto& l : labels) t.add(l);
    return t;
  }

  void add(const std::string& label, std::uint64_t count = 1);

  const std::map<std::string, std::uint64_t>& counts() const { return counts_; }
  std::uint64_t count(const std::string& label) const;
  std::uint64_t total() const { return total_; }
  std::size_t size() const { return counts_.size(); }
  bool empty() const { return counts_.empty(); }
  double relative(const std::string& label) const;
  std::map<std::string, double> ranks() const;

 private:
  std::map<std::string, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

// Midranks with rank 1 assigned to the largest value.
std::vector<double> descending_midranks(std::span<const double> values);

struct RankCorrelation {
  std::optional<double> rho;
  std::size_t shared = 0;  // labels entering the computation
  std::string reason;
};

// Spearman rho over labels present in both tables with count >= min_count
// in each, ranked within that shared subset.
RankCorrelation spearman_rank_correlation(const FrequencyTable& a, const FrequencyTable& b,
                                          std::uint64_t min_count = 1);

struct ZipfRow {
  std::string label;
  double rank_a;
  double freq_a;
  double rank_b;
  double freq_b;
};

struct ZipfTable {
  std::vector<ZipfRow> rows;  // sorted by rank_a
  std::vector<std::string> warnings;
};

// Ranks are recomputed on the shared labels; frequencies are relative to
// each full table.
ZipfTable zipf_table(const FrequencyTable& a, const FrequencyTable& b);

// Least-squares slope of ln(relative frequency) against ln(rank) over the
// `max_rank` most frequent labels.
double zipf_slope(const FrequencyTable& table, std::size_t max_rank);

struct RatioRow {
  std::string label;
  double log_ratio;  // positive: over-produced in a
};

// ln((f_a + s) / (f_b + s)) over the union of labels, f = relative
// frequency; sorted from most over- to most under-produced.
std::vector<RatioRow> production_ratio(const FrequencyTable& a, const FrequencyTable& b,
                                       double smoothing = 1e-9);

struct ParsedToken {
  std::size_t id = 0;    // 1-based position
  std::string form;
  std::string upos;
  std::size_t head = 0;  // 0 = root
  std::string deprel;
};

struct ParsedSentence {
  std::vector<ParsedToken> tokens;
  std::size_t line = 0;  // first line of the block
};

struct ConlluRejection {
  std::size_t line;
  std::string reason;
};

struct ConlluDocument {
  std::vector<ParsedSentence> sentences;
  std::vector<ConlluRejection> rejected;  // well-formed blocks that are not trees
};

// Malformed lines raise FormatError with the line number. Multiword ranges
// and empty nodes are skipped; DEPS and MISC are ignored.
ConlluDocument ingest_conllu(std::istream& in, const std::string& name = "<stream>");
ConlluDocument ingest_conllu(const std::filesystem::path& path);

// Empty when the sentence is a tree with exactly one root.
std::optional<std::string> tree_violation(const ParsedSentence& s);

struct DependencyLengths {
  std::vector<std::size_t> distances;  // one per non-root arc, in token order
  std::optional<double> mean;
};

DependencyLengths dependency_lengths(const ParsedSentence& s);

// Distinct sorted values with F(x) = P(X <= x).
std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> values);

enum class LabelKind { kPos, kDep };

FrequencyTable label_counts(std::span<const ParsedSentence> sentences, LabelKind kind);

struct LabelRow {
  std::string label;
  double freq_a;
  double freq_b;
  double difference;  // freq_a - freq_b
};

// Relative label frequencies in each set, sorted by |difference|.
std::vector<LabelRow> label_frequency_comparison(std::span<const ParsedSentence> a,
                                                 std::span<const ParsedSentence> b,
                                                 LabelKind kind);

}  // namespace gsnprobe::stats
