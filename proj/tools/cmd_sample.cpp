#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "commands.hpp"
#include "common.hpp"

#include "gsnprobe/chain_io.hpp"
#include "gsnprobe/error.hpp"
#include "gsnprobe/samplers.hpp"

namespace gsnprobe::cli {

namespace {

struct SampleOptions {
  BackendOptions backend;
  std::size_t length = 0;
  std::string kernel = "gsn";
  std::uint64_t epochs = 0;
  std::uint64_t burn_in = 1000;
  std::uint64_t lag = 500;
  double epsilon = 0.001;
  std::uint64_t seed = 0;
  std::size_t chains = 1;
  std::string order;
  std::string init;
  bool trace = false;
  std::string out;
};

TokenSequence parse_init(const ConditionalModel& model, const std::string& text) {
  std::istringstream words(text);
  std::vector<TokenId> ids;
  for (std::string w; words >> w;) {
    auto id = model.vocabulary().find(w);
    if (!id) throw UsageError("--init token '" + w + "' is not in the vocabulary");
    ids.push_back(*id);
  }
  if (ids.size() != model.length()) {
    throw UsageError("--init has " + std::to_string(ids.size()) + " tokens, chain length is " +
                     std::to_string(model.length()));
  }
  return TokenSequence(std::move(ids));
}

int run_sample(const SampleOptions& o) {
  ChainConfig config;
  config.epochs = o.epochs;
  config.burn_in = o.burn_in;
  config.lag = o.lag;
  config.epsilon = o.epsilon;
  config.kernel = parse_kernel(o.kernel);
  config.seed = o.seed;
  config.trace = o.trace;
  if (!o.order.empty()) config.order = parse_index_list(o.order);
  if (o.chains == 0) throw UsageError("--chains must be positive");

  BackendOptions bo = o.backend;
  if (o.length > 0) bo.length = o.length;
  const Backend backend = open_backend(bo);
  const ConditionalModel& model = *backend.model;
  validate(config, model.length());
  std::optional<TokenSequence> init;
  if (!o.init.empty()) init = parse_init(model, o.init);

  const fs::path dir = prepare_output_dir(o.out);
  const auto chains = run_chains(model, config, o.chains, init);

  const fs::path log = dir / "chains.jsonl";
  std::size_t truncated = 0;
  {
    std::ofstream out(log);
    if (!out) throw UsageError("cannot write " + log.string());
    out << chain_header(config, model, o.chains).dump() << '\n';
    for (const auto& chain : chains) {
      for (const auto& r : chain) {
        if (r.kind == RecordKind::kTruncated) ++truncated;
        out << record_to_json(r).dump() << '\n';
      }
    }
  }

  nlohmann::json cfg = config_to_json(config);
  cfg["backend"] = o.backend.spec;
  cfg["length"] = model.length();
  cfg["chains"] = o.chains;
  if (init) cfg["init"] = o.init;
  Manifest manifest("sample", cfg);
  if (backend.path) manifest.input(*backend.path);
  manifest.output(log);
  nlohmann::json seeds = nlohmann::json::array();
  for (std::size_t c = 0; c < o.chains; ++c) seeds.push_back(derive_seed(config.seed, c));
  manifest.set("seeds", seeds);
  manifest.set("rng", Rng::kAlgorithm);
  manifest.set("model_fingerprint", model.fingerprint());
  manifest.write(dir);

  std::size_t records = 0;
  for (const auto& c : chains) records += c.size();
  std::cout << "wrote " << records << " records from " << o.chains << " chain(s) to " << log.string()
            << '\n';
  if (truncated > 0) {
    std::cerr << "warning: " << truncated << " chain(s) truncated by backend failures\n";
    return kBackend;
  }
  return kOk;
}

}  // namespace

void register_sample(CLI::App& app, Action& action) {
  auto o = std::make_shared<SampleOptions>();
  auto* sub = app.add_subcommand("sample", "Run sampling chains and write chains.jsonl");
  add_backend_flags(sub, o->backend);
  sub->add_option("--length", o->length, "Sequence length in tokens");
  sub->add_option("--kernel", o->kernel, "gsn | mh | fixed-order")
      ->check(CLI::IsMember({"gsn", "mh", "fixed-order"}))
      ->capture_default_str();
  sub->add_option("--epochs", o->epochs, "Epochs per chain")->required();
  sub->add_option("--burn-in", o->burn_in, "Epochs discarded before recording")->capture_default_str();
  sub->add_option("--lag", o->lag, "Epochs between recorded samples")->capture_default_str();
  sub->add_option("--epsilon", o->epsilon, "Per-epoch reset probability")->capture_default_str();
  sub->add_option("--seed", o->seed, "Base seed")->capture_default_str();
  sub->add_option("--chains", o->chains, "Independent chains")->capture_default_str();
  sub->add_option("--order", o->order, "Site permutation for fixed-order, e.g. 2,0,1");
  sub->add_option("--init", o->init, "Initial sequence as space-separated tokens (default all-mask)");
  sub->add_flag("--trace", o->trace, "Record every epoch");
  sub->add_option("--out", o->out, "Output directory")->required();
  sub->callback([o, &action] { action = [o] { return run_sample(*o); }; });
}

}  // namespace gsnprobe::cli
