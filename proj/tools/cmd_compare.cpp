#include <algorithm>
#include <cctype>
#include <iostream>
#include <memory>
#include <sstream>

#include "commands.hpp"
#include "common.hpp"

#include "gsnprobe/chain_io.hpp"
#include "gsnprobe/corpus.hpp"
#include "gsnprobe/corpus_stats.hpp"
#include "gsnprobe/error.hpp"
#include "gsnprobe/report.hpp"

namespace gsnprobe::cli {

namespace {

struct CompareOptions {
  std::string samples;
  std::string reference;
  std::string conllu_samples;
  std::string conllu_reference;
  std::uint64_t min_count = 11;
  std::string out;
};

// Chain logs contribute their record texts; anything else is read as one
// sentence per line. A directory is read as a sentence pool.
std::vector<std::string> load_sentences(const fs::path& path) {
  std::vector<std::string> out;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path)) {
      const auto name = e.path().filename().string();
      if (name.rfind("pool_len", 0) == 0 && e.path().extension() == ".txt") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      auto lines = corpus::read_lines(f);
      out.insert(out.end(), lines.begin(), lines.end());
    }
  } else if (path.extension() == ".jsonl") {
    for (const auto& r : read_chain_log(path).records) {
      if (r.kind != RecordKind::kTruncated) out.push_back(r.text);
    }
  } else {
    out = corpus::read_lines(path);
  }
  return out;
}

stats::FrequencyTable word_counts(const std::vector<std::string>& sentences) {
  stats::FrequencyTable t;
  for (const auto& s : sentences) {
    std::istringstream in(s);
    for (std::string w; in >> w;) {
      std::transform(w.begin(), w.end(), w.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      t.add(w);
    }
  }
  return t;
}

std::vector<double> pooled_lengths(const stats::ConlluDocument& doc) {
  std::vector<double> out;
  for (const auto& s : doc.sentences) {
    for (auto d : stats::dependency_lengths(s).distances) out.push_back(static_cast<double>(d));
  }
  return out;
}

int run_compare(const CompareOptions& o) {
  const fs::path dir = prepare_output_dir(o.out);
  nlohmann::json cfg{{"samples", o.samples}, {"reference", o.reference}, {"min_count", o.min_count}};
  if (!o.conllu_samples.empty()) {
    cfg["conllu_samples"] = o.conllu_samples;
    cfg["conllu_reference"] = o.conllu_reference;
  }
  Manifest manifest("compare", cfg);
  for (const auto& p : {o.samples, o.reference}) {
    if (fs::is_regular_file(p)) manifest.input(p);
  }

  const auto a = word_counts(load_sentences(o.samples));
  const auto b = word_counts(load_sentences(o.reference));
  if (a.empty()) throw FormatError("sample corpus " + o.samples + " is empty");
  if (b.empty()) throw FormatError("reference corpus " + o.reference + " is empty");

  std::vector<fs::path> outputs;
  nlohmann::json summary;
  std::vector<std::string> warnings;

  const auto zipf = stats::zipf_table(a, b);
  warnings.insert(warnings.end(), zipf.warnings.begin(), zipf.warnings.end());
  report::CsvTable zt({"label", "rank_a", "freq_a", "rank_b", "freq_b"});
  report::Series za{"samples", {}, {}}, zb{"reference", {}, {}};
  for (const auto& r : zipf.rows) {
    zt.add({r.label, r.rank_a, r.freq_a, r.rank_b, r.freq_b});
    za.x.push_back(r.rank_a);
    za.y.push_back(r.freq_a);
    zb.x.push_back(r.rank_b);
    zb.y.push_back(r.freq_b);
  }
  zt.write(dir / "zipf.csv");
  report::ChartOptions zo{"Rank-frequency (shared words)", "rank", "relative frequency"};
  zo.log_x = zo.log_y = true;
  report::write_text(dir / "zipf.svg", report::scatter_chart({za, zb}, zo));
  outputs.insert(outputs.end(), {dir / "zipf.csv", dir / "zipf.svg"});

  report::CsvTable sp({"variant", "min_count", "rho", "shared", "note"});
  nlohmann::json rho = nlohmann::json::array();
  for (const auto& [variant, min] : {std::pair<std::string, std::uint64_t>{"all", 1},
                                     {"min_count", o.min_count}}) {
    const auto r = stats::spearman_rank_correlation(a, b, min);
    sp.add({variant, static_cast<unsigned long long>(min), r.rho,
            static_cast<unsigned long long>(r.shared), r.reason});
    rho.push_back({{"variant", variant}, {"min_count", min}, {"shared", r.shared},
                   {"rho", r.rho ? nlohmann::json(*r.rho) : nlohmann::json(nullptr)}});
    if (!r.rho) warnings.push_back("spearman (" + variant + ") undefined: " + r.reason);
  }
  sp.write(dir / "spearman.csv");
  outputs.push_back(dir / "spearman.csv");
  summary["spearman"] = rho;

  report::CsvTable rt({"label", "log_ratio"});
  for (const auto& r : stats::production_ratio(a, b)) rt.add({r.label, r.log_ratio});
  rt.write(dir / "ratios.csv");
  outputs.push_back(dir / "ratios.csv");

  if (!o.conllu_samples.empty() || !o.conllu_reference.empty()) {
    if (o.conllu_samples.empty() || o.conllu_reference.empty()) {
      throw UsageError("--conllu-samples and --conllu-reference must be given together");
    }
    manifest.input(o.conllu_samples);
    manifest.input(o.conllu_reference);
    const auto pa = stats::ingest_conllu(fs::path(o.conllu_samples));
    const auto pb = stats::ingest_conllu(fs::path(o.conllu_reference));
    for (const auto* doc : {&pa, &pb}) {
      for (const auto& rej : doc->rejected) {
        warnings.push_back("conllu sentence at line " + std::to_string(rej.line) +
                           " rejected: " + rej.reason);
      }
    }
    for (const auto& [name, kind] : {std::pair<std::string, stats::LabelKind>{"pos", stats::LabelKind::kPos},
                                     {"dep", stats::LabelKind::kDep}}) {
      report::CsvTable t({"label", "freq_a", "freq_b", "difference"});
      for (const auto& r : stats::label_frequency_comparison(pa.sentences, pb.sentences, kind)) {
        t.add({r.label, r.freq_a, r.freq_b, r.difference});
      }
      t.write(dir / (name + ".csv"));
      outputs.push_back(dir / (name + ".csv"));
    }
    report::CsvTable cdf({"set", "distance", "cdf"});
    std::vector<report::Series> lines;
    nlohmann::json means;
    for (const auto& [name, doc] : {std::pair<std::string, const stats::ConlluDocument*>{"samples", &pa},
                                    {"reference", &pb}}) {
      const auto lengths = pooled_lengths(*doc);
      report::Series s{name, {}, {}};
      for (const auto& [x, f] : stats::empirical_cdf(lengths)) {
        cdf.add({name, x, f});
        s.x.push_back(x);
        s.y.push_back(f);
      }
      lines.push_back(std::move(s));
      double total = 0.0;
      for (double d : lengths) total += d;
      means[name] = lengths.empty() ? nlohmann::json(nullptr)
                                    : nlohmann::json(total / static_cast<double>(lengths.size()));
    }
    cdf.write(dir / "deplen_cdf.csv");
    report::write_text(dir / "deplen_cdf.svg",
                       report::line_chart(lines, {"Dependency length CDF", "distance", "F"}));
    outputs.insert(outputs.end(), {dir / "deplen_cdf.csv", dir / "deplen_cdf.svg"});
    summary["mean_dependency_length"] = means;
  }

  summary["warnings"] = warnings;
  summary["tokens"] = {{"samples", a.total()}, {"reference", b.total()}};
  summary["types"] = {{"samples", a.size()}, {"reference", b.size()}};
  report::write_text(dir / "summary.json", summary.dump(2) + "\n");
  outputs.push_back(dir / "summary.json");
  for (const auto& p : outputs) manifest.output(p);
  manifest.write(dir);

  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& r : rho) {
    std::cout << "spearman " << r["variant"].get<std::string>() << " (min count "
              << r["min_count"].get<std::uint64_t>() << ", " << r["shared"].get<std::size_t>()
              << " shared): " << (r["rho"].is_null() ? "undefined" : report::format_double(r["rho"].get<double>()))
              << '\n';
  }
  return kOk;
}

}  // namespace

void register_compare(CLI::App& app, Action& action) {
  auto o = std::make_shared<CompareOptions>();
  auto* sub = app.add_subcommand("compare", "Lexical and syntactic comparison against a reference");
  sub->add_option("--samples", o->samples, "Sample sentences (.jsonl chain log or text)")
      ->required()
      ->check(CLI::ExistingPath);
  sub->add_option("--reference", o->reference, "Reference sentences (text file or pool directory)")
      ->required()
      ->check(CLI::ExistingPath);
  sub->add_option("--conllu-samples", o->conllu_samples, "Parsed samples")->check(CLI::ExistingFile);
  sub->add_option("--conllu-reference", o->conllu_reference, "Parsed reference")
      ->check(CLI::ExistingFile);
  sub->add_option("--min-count", o->min_count, "Count threshold for the filtered rank correlation")
      ->capture_default_str();
  sub->add_option("--out", o->out, "Output directory")->required();
  sub->callback([o, &action] { action = [o] { return run_compare(*o); }; });
}

}  // namespace gsnprobe::cli
