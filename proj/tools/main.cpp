#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "commands.hpp"
#include "common.hpp"

#include "gsnprobe/chain_io.hpp"
#include "gsnprobe/error.hpp"

int main(int argc, char** argv) {
  using namespace gsnprobe;
  using namespace gsnprobe::cli;

  CLI::App app{"gsnprobe: serial-reproduction sampling and diagnostics for masked language models"};
  app.set_version_flag("--version", kToolVersion);
  app.set_config("--config", "", "TOML-style key = value file; flags override it");
  app.require_subcommand(1);

  Action action;
  register_sample(app, action);
  register_diagnose(app, action);
  register_compare(app, action);
  register_oracle(app, action);
  register_pool(app, action);
  register_ngram(app, action);
  register_serve_stub(app, action);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    return action ? action() : kUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const BackendError& e) {
    std::cerr << "backend error: " << e.what() << '\n';
    return kBackend;
  } catch (const ConvergenceError& e) {
    std::cerr << "oracle error: " << e.what() << '\n';
    return kOracleFailure;
  } catch (const NonErgodicError& e) {
    std::cerr << "oracle error: " << e.what() << '\n';
    return kOracleFailure;
  } catch (const FormatError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
}
