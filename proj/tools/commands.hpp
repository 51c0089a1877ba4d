#pragma once

#include <functional>

#include "CLI11.hpp"

#include "common.hpp"

namespace gsnprobe::cli {

// Each subcommand installs its work into `action` when selected; main runs
// it after parsing so errors map onto exit codes in one place.
using Action = std::function<int()>;

void add_backend_flags(CLI::App* sub, BackendOptions& b);

void register_sample(CLI::App& app, Action& action);
void register_diagnose(CLI::App& app, Action& action);
void register_compare(CLI::App& app, Action& action);
void register_oracle(CLI::App& app, Action& action);
void register_pool(CLI::App& app, Action& action);
void register_ngram(CLI::App& app, Action& action);
void register_serve_stub(CLI::App& app, Action& action);

}  // namespace gsnprobe::cli
