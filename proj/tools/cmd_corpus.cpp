#include <fstream>
#include <iostream>
#include <memory>
#include <set>

#include "commands.hpp"
#include "common.hpp"

#include "gsnprobe/chain_io.hpp"
#include "gsnprobe/corpus.hpp"
#include "gsnprobe/error.hpp"
#include "gsnprobe/hash.hpp"
#include "gsnprobe/ngram.hpp"

namespace gsnprobe::cli {

namespace {

struct PoolOptions {
  std::string corpus;
  std::string vocab;
  std::string lengths = "11,21";
  std::string denylist;
  std::size_t shards = 1;
  std::string out;
};

int run_pool(const PoolOptions& o) {
  const auto lengths = parse_index_list(o.lengths);
  if (lengths.empty()) throw UsageError("--lengths is empty");
  wordpiece::Tokenizer tokenizer(Vocabulary::load(o.vocab));
  corpus::FilterOptions filters;
  if (!o.denylist.empty()) filters.denylist = corpus::load_denylist(o.denylist);
  const auto lines = corpus::read_lines(o.corpus);
  const auto pool = corpus::build_pool(lines, tokenizer, {lengths.begin(), lengths.end()},
                                       fs::path(o.corpus).filename().string(), filters,
                                       std::max<std::size_t>(1, o.shards));
  const fs::path dir = prepare_output_dir(o.out);
  corpus::write_pool(pool, dir, tokenizer);
  // Run metadata goes into the pool's own manifest.
  auto manifest = nlohmann::json::parse(std::ifstream(dir / "manifest.json"));
  manifest["tool"] = kToolName;
  manifest["version"] = kToolVersion;
  manifest["subcommand"] = "pool";
  manifest["config"] = {{"corpus", o.corpus}, {"vocab", o.vocab}, {"lengths", lengths},
                        {"denylist", o.denylist}, {"shards", o.shards}};
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& p : {o.corpus, o.vocab, o.denylist}) {
    if (!p.empty()) inputs.push_back({{"path", p}, {"hash", hash_file(p)}});
  }
  manifest["inputs"] = inputs;
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
  for (const auto& w : pool.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& [len, sentences] : pool.buckets) {
    std::cout << "length " << len << ": " << sentences.size() << " sentences\n";
  }
  return kOk;
}

struct TrainOptions {
  std::string corpus;
  std::size_t order = 5;
  double discount = 0.75;
  std::string out;
};

int run_train(const TrainOptions& o) {
  const auto lines = corpus::read_lines(o.corpus);
  const auto sentences = ngram::split_sentences(lines);
  const auto model = ngram::NgramModel::train(sentences, o.order, o.discount);
  const fs::path dir = prepare_output_dir(o.out);
  model.save(dir / "model.json");
  Manifest manifest("ngram-train", {{"corpus", o.corpus}, {"order", o.order}, {"discount", o.discount}});
  manifest.input(o.corpus);
  manifest.output(dir / "model.json");
  manifest.set("vocab_size", model.vocab_size());
  manifest.write(dir);
  std::cout << "trained order-" << o.order << " model over " << model.vocab_size() << " words\n";
  return kOk;
}

struct GenerateOptions {
  std::string model;
  std::size_t length = 10;
  std::size_t count = 100;
  std::uint64_t seed = 0;
  std::string out;
};

int run_generate(const GenerateOptions& o) {
  const auto model = ngram::NgramModel::load(o.model);
  const fs::path dir = prepare_output_dir(o.out);
  Rng rng(o.seed);
  {
    std::ofstream out(dir / "samples.txt");
    if (!out) throw UsageError("cannot write " + (dir / "samples.txt").string());
    for (std::size_t i = 0; i < o.count; ++i) {
      const auto words = model.sample_words(o.length, rng);
      for (std::size_t k = 0; k < words.size(); ++k) out << (k ? " " : "") << words[k];
      out << '\n';
    }
  }
  Manifest manifest("ngram-sample",
                    {{"model", o.model}, {"length", o.length}, {"count", o.count}, {"seed", o.seed}});
  manifest.input(o.model);
  manifest.output(dir / "samples.txt");
  manifest.set("rng", Rng::kAlgorithm);
  manifest.write(dir);
  std::cout << "wrote " << o.count << " sentences to " << (dir / "samples.txt").string() << '\n';
  return kOk;
}

}  // namespace

void register_pool(CLI::App& app, Action& action) {
  auto o = std::make_shared<PoolOptions>();
  auto* sub = app.add_subcommand("pool", "Filter and bucket a reference corpus by token length");
  sub->add_option("--corpus", o->corpus, "One sentence per line")->required()->check(CLI::ExistingFile);
  sub->add_option("--vocab", o->vocab, "WordPiece vocabulary")->required()->check(CLI::ExistingFile);
  sub->add_option("--lengths", o->lengths, "Comma-separated token lengths")->capture_default_str();
  sub->add_option("--denylist", o->denylist, "Sentences to drop, one per line")
      ->check(CLI::ExistingFile);
  sub->add_option("--shards", o->shards, "Worker threads")->capture_default_str();
  sub->add_option("--out", o->out, "Output directory")->required();
  sub->callback([o, &action] { action = [o] { return run_pool(*o); }; });
}

void register_ngram(CLI::App& app, Action& action) {
  auto t = std::make_shared<TrainOptions>();
  auto* train = app.add_subcommand("ngram-train", "Train an interpolated Kneser-Ney model");
  train->add_option("--corpus", t->corpus, "One sentence per line")->required()->check(CLI::ExistingFile);
  train->add_option("--order", t->order, "n-gram order")->capture_default_str();
  train->add_option("--discount", t->discount, "Absolute discount")->capture_default_str();
  train->add_option("--out", t->out, "Output directory")->required();
  train->callback([t, &action] { action = [t] { return run_train(*t); }; });

  auto g = std::make_shared<GenerateOptions>();
  auto* gen = app.add_subcommand("ngram-sample", "Sample fixed-length sentences left to right");
  gen->add_option("--model", g->model, "Model JSON")->required()->check(CLI::ExistingFile);
  gen->add_option("--length", g->length, "Words per sentence")->capture_default_str();
  gen->add_option("--count", g->count, "Sentences")->capture_default_str();
  gen->add_option("--seed", g->seed, "Seed")->capture_default_str();
  gen->add_option("--out", g->out, "Output directory")->required();
  gen->callback([g, &action] { action = [g] { return run_generate(*g); }; });
}

}  // namespace gsnprobe::cli
