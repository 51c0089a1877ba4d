#include <iostream>
#include <map>
#include <memory>
#include <numeric>

#include "commands.hpp"
#include "common.hpp"

#include "gsnprobe/chain_io.hpp"
#include "gsnprobe/diagnostics.hpp"
#include "gsnprobe/error.hpp"
#include "gsnprobe/report.hpp"

namespace gsnprobe::cli {

namespace {

struct DiagnoseOptions {
  std::vector<std::string> files;
  std::string lags = "0,1,2,5,10,20,50,100,200,500";
  std::size_t window = 0;
  std::string out;
};

struct Series {
  std::string label;
  std::uint64_t chain_id;
  std::vector<std::uint64_t> epochs;
  std::vector<double> energy;
  std::vector<std::size_t> edits;
};

std::vector<Series> collect(const fs::path& file, const ChainLog& log) {
  std::map<std::uint64_t, Series> by_chain;
  for (const auto& r : log.records) {
    if (r.kind == RecordKind::kTruncated) continue;
    auto& s = by_chain[r.chain_id];
    s.chain_id = r.chain_id;
    s.epochs.push_back(r.epoch);
    s.energy.push_back(r.energy.value);
    s.edits.push_back(r.edits);
  }
  std::vector<Series> out;
  for (auto& [id, s] : by_chain) {
    s.label = file.stem().string() + "_c" + std::to_string(id);
    out.push_back(std::move(s));
  }
  return out;
}

int run_diagnose(const DiagnoseOptions& o) {
  const auto lags = parse_index_list(o.lags);
  const fs::path dir = prepare_output_dir(o.out);
  nlohmann::json cfg{{"files", o.files}, {"lags", lags}, {"window", o.window}};
  Manifest manifest("diagnose", cfg);

  std::vector<Series> all;
  for (const auto& f : o.files) {
    manifest.input(f);
    auto log = read_chain_log(f);
    auto s = collect(f, log);
    all.insert(all.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
  }
  if (all.empty()) throw FormatError("no chain records in the supplied files");

  report::CsvTable energy({"series", "chain", "epoch", "energy"});
  report::CsvTable edits({"series", "chain", "epoch", "edits"});
  std::vector<report::Series> energy_plot;
  std::vector<report::Series> acf_plot;
  nlohmann::json summary = nlohmann::json::array();
  std::vector<fs::path> outputs;

  for (const auto& s : all) {
    report::Series line{s.label, {}, {}};
    for (std::size_t i = 0; i < s.epochs.size(); ++i) {
      const double e = s.energy[i];
      energy.add({s.label, static_cast<unsigned long long>(s.chain_id),
                  static_cast<unsigned long long>(s.epochs[i]),
                  std::isfinite(e) ? std::optional<double>(e) : std::nullopt});
      edits.add({s.label, static_cast<unsigned long long>(s.chain_id),
                 static_cast<unsigned long long>(s.epochs[i]),
                 static_cast<unsigned long long>(s.edits[i])});
      line.x.push_back(static_cast<double>(s.epochs[i]));
      line.y.push_back(e);
    }
    energy_plot.push_back(std::move(line));

    report::CsvTable acf({"lag", "r", "n_pairs"});
    report::Series acf_line{s.label, {}, {}};
    nlohmann::json undefined = nlohmann::json::object();
    for (const auto& row : diagnostics::autocorrelation_by_lag(s.energy, lags)) {
      acf.add({static_cast<unsigned long long>(row.lag), row.r.value,
               static_cast<unsigned long long>(row.r.pairs)});
      if (row.r.defined()) {
        acf_line.x.push_back(static_cast<double>(row.lag));
        acf_line.y.push_back(*row.r.value);
      } else {
        undefined[std::to_string(row.lag)] = row.r.reason;
      }
    }
    acf_plot.push_back(std::move(acf_line));
    const fs::path acf_path = dir / ("acf_" + s.label + ".csv");
    acf.write(acf_path);
    outputs.push_back(acf_path);

    const auto profile = diagnostics::edit_rate_profile(s.edits);
    const std::size_t total_edits = std::accumulate(s.edits.begin(), s.edits.end(), std::size_t{0});
    summary.push_back({{"series", s.label},
                       {"records", s.epochs.size()},
                       {"max_zero_edit_run", profile.max_zero_run},
                       {"total_edits", total_edits},
                       {"acf_undefined", undefined}});
  }

  energy.write(dir / "energy.csv");
  edits.write(dir / "edits.csv");
  report::write_text(dir / "energy.svg",
                     report::line_chart(energy_plot, {"Energy trajectories", "epoch",
                                                      "pseudo-log-likelihood"}));
  report::write_text(dir / "acf.svg",
                     report::line_chart(acf_plot, {"Energy autocorrelation", "lag", "r"}));
  outputs.insert(outputs.end(), {dir / "energy.csv", dir / "edits.csv", dir / "energy.svg",
                                 dir / "acf.svg"});

  nlohmann::json result{{"series", summary}};
  if (o.window > 0) {
    if (all.size() < 2) throw UsageError("--window compares two chains; only one was supplied");
    const auto cmp = diagnostics::compare_terminal_windows(all[0].energy, all[1].energy, o.window);
    result["terminal_windows"] = {{"a", all[0].label},
                                  {"b", all[1].label},
                                  {"window", o.window},
                                  {"mean_a", cmp.mean_a},
                                  {"mean_b", cmp.mean_b},
                                  {"pooled_sd", cmp.pooled_sd},
                                  {"separation_sd", cmp.separation()},
                                  {"overlapping", cmp.separation() <= 2.0}};
  }
  report::write_text(dir / "summary.json", result.dump(2) + "\n");
  outputs.push_back(dir / "summary.json");

  for (const auto& p : outputs) manifest.output(p);
  manifest.write(dir);
  std::cout << "diagnosed " << all.size() << " chain(s); reports in " << dir.string() << '\n';
  return kOk;
}

}  // namespace

void register_diagnose(CLI::App& app, Action& action) {
  auto o = std::make_shared<DiagnoseOptions>();
  auto* sub = app.add_subcommand("diagnose", "Energy, autocorrelation and edit-run reports");
  sub->add_option("files", o->files, "Chain JSONL files")->required()->check(CLI::ExistingFile);
  sub->add_option("--lags", o->lags, "Comma-separated lags (in records)")->capture_default_str();
  sub->add_option("--window", o->window, "Compare the final N energies of the first two chains");
  sub->add_option("--out", o->out, "Output directory")->required();
  sub->callback([o, &action] { action = [o] { return run_diagnose(*o); }; });
}

}  // namespace gsnprobe::cli
