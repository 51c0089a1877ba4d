#include "common.hpp"

#include "commands.hpp"

#include <charconv>
#include <fstream>

#include "gsnprobe/chain_io.hpp"
#include "gsnprobe/error.hpp"
#include "gsnprobe/hash.hpp"
#include "gsnprobe/ngram.hpp"
#include "gsnprobe/tabular.hpp"

namespace gsnprobe::cli {

namespace {

std::pair<std::string, std::string> split_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) return {spec, ""};
  return {spec.substr(0, colon), spec.substr(colon + 1)};
}

}  // namespace

Backend open_backend(const BackendOptions& options) {
  const auto [kind, rest] = split_spec(options.spec);
  Backend backend;
  backend.kind = kind;
  if (kind == "tabular") {
    if (rest.empty()) throw UsageError("--backend tabular:PATH needs a fixture path");
    backend.path = rest;
    auto fixture = tabular::Fixture::load(rest);
    const std::size_t n = fixture.conditionals.space().n();
    if (options.length && *options.length != n) {
      throw UsageError("--length " + std::to_string(*options.length) +
                       " does not match the tabular fixture (n = " + std::to_string(n) + ")");
    }
    backend.model = std::make_unique<tabular::TabularModel>(std::move(fixture.conditionals),
                                                            std::move(fixture.tokens));
  } else if (kind == "ngram") {
    if (rest.empty()) throw UsageError("--backend ngram:PATH needs a model path");
    if (!options.length) throw UsageError("--backend ngram requires --length");
    backend.path = rest;
    backend.model =
        std::make_unique<ngram::NgramConditionalModel>(ngram::NgramModel::load(rest), *options.length);
  } else if (kind == "remote") {
    if (options.vocab.empty()) throw UsageError("--backend remote requires --vocab");
    if (!options.length) throw UsageError("--backend remote requires --length");
    remote::Endpoint endpoint;
    if (!rest.empty()) {
      endpoint.base_url = rest;
    } else if (!options.endpoint.empty()) {
      endpoint.base_url = options.endpoint;
    } else if (auto env = remote::endpoint_from_env()) {
      endpoint.base_url = *env;
    }
    endpoint.timeout = std::chrono::milliseconds(options.timeout_ms);
    endpoint.retries = options.retries;
    backend.path = options.vocab;
    backend.model = std::make_unique<remote::RemoteModel>(
        endpoint, Vocabulary::load(options.vocab), *options.length);
  } else {
    throw UsageError("unknown backend '" + options.spec +
                     "' (expected tabular:PATH, ngram:PATH or remote[:URL])");
  }
  return backend;
}

Manifest::Manifest(std::string subcommand, nlohmann::json config)
    : subcommand_(std::move(subcommand)), config_(std::move(config)) {}

void Manifest::input(const fs::path& path) {
  inputs_.push_back({{"path", path.string()}, {"hash", hash_file(path)}});
}

void Manifest::output(const fs::path& path) {
  outputs_.push_back({{"path", path.filename().string()}, {"hash", hash_file(path)}});
}

void Manifest::write(const fs::path& dir) const {
  nlohmann::json j{{"tool", kToolName},
                   {"version", kToolVersion},
                   {"subcommand", subcommand_},
                   {"config", config_},
                   {"inputs", inputs_},
                   {"outputs", outputs_}};
  for (const auto& [k, v] : extra_.items()) j[k] = v;
  std::ofstream out(dir / "manifest.json");
  if (!out) throw UsageError("cannot write " + (dir / "manifest.json").string());
  out << j.dump(2) << '\n';
}

fs::path prepare_output_dir(const std::string& dir) {
  if (dir.empty()) throw UsageError("--out is required");
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw UsageError("cannot create output directory " + dir + ": " + ec.message());
  return p;
}

std::vector<std::size_t> parse_index_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    std::string item = text.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.erase(item.begin());
    while (!item.empty() && item.back() == ' ') item.pop_back();
    if (!item.empty()) {
      std::size_t v = 0;
      auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc{} || ptr != item.data() + item.size()) {
        throw UsageError("expected a comma-separated list of integers, got '" + text + "'");
      }
      out.push_back(v);
    }
    start = end + 1;
  }
  return out;
}

void add_backend_flags(CLI::App* sub, BackendOptions& b) {
  sub->add_option("--backend", b.spec, "tabular:PATH | ngram:PATH | remote[:URL]")->required();
  sub->add_option("--vocab", b.vocab, "Vocabulary file (remote backend)");
  sub->add_option("--endpoint", b.endpoint, "Server URL (overrides GSNPROBE_ENDPOINT)");
  sub->add_option("--timeout-ms", b.timeout_ms, "Per-request timeout")->capture_default_str();
  sub->add_option("--retries", b.retries, "Retries per request")->capture_default_str();
}

}  // namespace gsnprobe::cli
