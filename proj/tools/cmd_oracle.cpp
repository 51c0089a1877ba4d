#include <iostream>
#include <memory>

#include "commands.hpp"
#include "common.hpp"

#include "gsnprobe/error.hpp"
#include "gsnprobe/oracle.hpp"
#include "gsnprobe/report.hpp"

namespace gsnprobe::cli {

namespace {

struct OracleOptions {
  std::string fixture;
  std::vector<std::uint64_t> random;  // V n seed
  double alpha = 1.0;
  std::string out;
};

int run_oracle(const OracleOptions& o) {
  if (o.fixture.empty() == o.random.empty()) {
    throw UsageError("give exactly one of --fixture PATH or --random V n seed");
  }
  nlohmann::json cfg;
  std::optional<tabular::Fixture> fixture;
  if (!o.fixture.empty()) {
    cfg["fixture"] = o.fixture;
    fixture = tabular::Fixture::load(o.fixture);
  } else {
    const std::size_t v = o.random[0], n = o.random[1];
    if (v == 0 || n == 0) throw UsageError("--random needs V >= 1 and n >= 1");
    cfg["random"] = {{"vocab_size", v}, {"n", n}, {"seed", o.random[2]}, {"alpha", o.alpha}};
    Rng rng(o.random[2]);
    fixture = tabular::Fixture::from_joint(tabular::ExactJoint::random_dirichlet(n, v, o.alpha, rng));
  }

  const auto report = oracle::run_battery(*fixture);
  std::cout << report.text();

  if (!o.out.empty()) {
    const fs::path dir = prepare_output_dir(o.out);
    Manifest manifest("oracle", cfg);
    if (!o.fixture.empty()) manifest.input(o.fixture);
    report::write_text(dir / "oracle.json", report.to_json().dump(2) + "\n");
    report::write_text(dir / "oracle.txt", report.text());
    if (o.fixture.empty()) {
      fixture->save(dir / "fixture.json");
      manifest.output(dir / "fixture.json");
    }
    manifest.output(dir / "oracle.json");
    manifest.output(dir / "oracle.txt");
    manifest.write(dir);
  }
  return report.passed() ? kOk : kOracleFailure;
}

}  // namespace

void register_oracle(CLI::App& app, Action& action) {
  auto o = std::make_shared<OracleOptions>();
  auto* sub = app.add_subcommand("oracle", "Exact stationary checks on a tabular network");
  sub->add_option("--fixture", o->fixture, "Tabular fixture JSON")->check(CLI::ExistingFile);
  sub->add_option("--random", o->random, "Dirichlet-random joint: V n seed")->expected(3);
  sub->add_option("--alpha", o->alpha, "Dirichlet concentration for --random")->capture_default_str();
  sub->add_option("--out", o->out, "Optional output directory for the report");
  sub->callback([o, &action] { action = [o] { return run_oracle(*o); }; });
}

}  // namespace gsnprobe::cli
