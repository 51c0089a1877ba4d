#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gsnprobe/conditional_model.hpp"
#include "gsnprobe/remote.hpp"

namespace gsnprobe::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kData = 2,
  kBackend = 3,
  kOracleFailure = 4,
};

struct BackendOptions {
  std::string spec;  // tabular:PATH | ngram:PATH | remote[:URL]
  std::optional<std::size_t> length;
  std::string vocab;
  std::string endpoint;
  int timeout_ms = 30000;
  int retries = 3;
};

struct Backend {
  std::unique_ptr<ConditionalModel> model;
  std::string kind;
  std::optional<fs::path> path;  // fixture or model file
};

// Resolves the backend and checks --length against it before any work.
Backend open_backend(const BackendOptions& options);

// Accumulates the run manifest written next to every output set.
class Manifest {
 public:
  Manifest(std::string subcommand, nlohmann::json config);

  void input(const fs::path& path);
  void output(const fs::path& path);
  void set(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }
  void write(const fs::path& dir) const;

 private:
  std::string subcommand_;
  nlohmann::json config_;
  nlohmann::json inputs_ = nlohmann::json::array();
  nlohmann::json outputs_ = nlohmann::json::array();
  nlohmann::json extra_ = nlohmann::json::object();
};

fs::path prepare_output_dir(const std::string& dir);

std::vector<std::size_t> parse_index_list(const std::string& text);

}  // namespace gsnprobe::cli

