#include <cmath>

#include "doctest.h"

#include "gsnprobe/error.hpp"
#include "gsnprobe/remote.hpp"
#include "gsnprobe/samplers.hpp"
#include "gsnprobe/tabular.hpp"
#include "support.hpp"

using namespace gsnprobe;
using namespace gsnprobe::remote;
using namespace gsnprobe::tabular;

namespace {

TabularModel random_model(std::size_t n, std::size_t v, std::uint64_t seed) {
  Rng rng(seed);
  return TabularModel(derive_conditionals(ExactJoint::random_dirichlet(n, v, 1.0, rng)));
}

Endpoint quick(const std::string& url) {
  Endpoint e;
  e.base_url = url;
  e.timeout = std::chrono::milliseconds(2000);
  e.retries = 1;
  e.backoff = std::chrono::milliseconds(5);
  return e;
}

}  // namespace

TEST_CASE("stub server returns the table conditionals") {
  const auto local = random_model(3, 3, 1);
  ProtocolServer server(local, "table");
  server.start();
  const RemoteModel remote(quick(server.url()), local.vocabulary(), 3);
  CHECK(remote.info().model == "table");
  CHECK(remote.info().vocab_size == local.vocabulary().size());
  const auto& space = local.table().space();
  for (std::size_t s = 0; s < space.size(); ++s) {
    const auto sym = space.decode(s);
    const TokenSequence seq(std::vector<TokenId>(sym.begin(), sym.end()));
    for (std::size_t k = 0; k < 3; ++k) {
      const auto want = local.query(seq, k);
      const auto got = remote.query(seq, k);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-9);
    }
  }
  server.stop();
}

TEST_CASE("batched queries match single queries and empty batches are empty") {
  const auto local = random_model(3, 2, 2);
  ProtocolServer server(local, "table");
  server.start();
  const RemoteModel remote(quick(server.url()), local.vocabulary(), 3);
  const TokenSequence seq({1, 0, 1});
  const std::vector<std::size_t> sites{0, 1, 2};
  const auto batch = remote.query_sites(seq, sites);
  for (std::size_t k = 0; k < 3; ++k) CHECK(batch[k] == remote.query(seq, k));
  CHECK(remote.query_sites(seq, std::vector<std::size_t>{}).empty());
  const std::vector<TokenId> ids{1, 0, 1};
  CHECK(query_conditionals(quick(server.url()), ids, std::vector<std::size_t>{}).vectors.empty());
}

TEST_CASE("zero probabilities survive the wire as null log-probabilities") {
  const testing::ConstantModel local(3, 2, 1);
  ProtocolServer server(local, "constant");
  server.start();
  const RemoteModel remote(quick(server.url()), local.vocabulary(), 2);
  const auto p = remote.query(TokenSequence({0, 2}), 0);
  CHECK(p[1] == 1.0);
  CHECK(p[0] == 0.0);
  CHECK(p[2] == 0.0);
}

TEST_CASE("closed port raises a connection error after the retry budget") {
  int port = 0;
  {
    const testing::UniformModel m(2, 2);
    ProtocolServer probe(m, "x");
    port = probe.start();
    probe.stop();
  }
  auto e = quick("http://127.0.0.1:" + std::to_string(port));
  e.retries = 3;
  try {
    fetch_info(e);
    FAIL("expected ConnectionError");
  } catch (const ConnectionError& err) {
    CHECK(err.attempts() == 4);  // first try plus three retries
  }
}

TEST_CASE("vocabulary mismatch names both sizes") {
  const testing::UniformModel served(5, 3);
  ProtocolServer server(served, "five");
  server.start();
  const Vocabulary local(testing::word_tokens(3));
  try {
    RemoteModel(quick(server.url()), local, 3);
    FAIL("expected ConfigError");
  } catch (const ConfigError& err) {
    const std::string msg = err.what();
    CHECK(msg.find('7') != std::string::npos);
    CHECK(msg.find('5') != std::string::npos);
  }
}

TEST_CASE("length beyond the server limit is a config error") {
  const testing::UniformModel served(2, 3);
  ProtocolServer server(served, "short");
  server.start();
  CHECK_THROWS_AS(RemoteModel(quick(server.url()), served.vocabulary(), 4), ConfigError);
}

TEST_CASE("server rejects bad requests with client errors") {
  const testing::UniformModel served(2, 3);
  ProtocolServer server(served, "u");
  server.start();
  const auto e = quick(server.url());
  const std::vector<TokenId> ok{0, 1, 0};
  CHECK_THROWS_AS(query_conditionals(e, ok, std::vector<std::size_t>{3}), ProtocolError);
  const std::vector<TokenId> bad_id{0, 9, 0};
  CHECK_THROWS_AS(query_conditionals(e, bad_id, std::vector<std::size_t>{0}), ProtocolError);
  const std::vector<TokenId> too_long{0, 1, 0, 1};
  CHECK_THROWS_AS(query_conditionals(e, too_long, std::vector<std::size_t>{0}), ProtocolError);
}

TEST_CASE("log-probability rows normalize with negative infinity entries") {
  const std::vector<double> row{std::log(2.0), kNegInf, 0.0};
  const auto p = normalize_log_probs(row);
  CHECK(p[0] == doctest::Approx(2.0 / 3.0));
  CHECK(p[1] == 0.0);
  CHECK(p[2] == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(normalize_log_probs(std::vector<double>{kNegInf, kNegInf}), ProtocolError);
}

TEST_CASE("chains through the stub equal chains on the local backend") {
  const auto local = random_model(3, 3, 9);
  ProtocolServer server(local, "table");
  server.start();
  const RemoteModel remote(quick(server.url()), local.vocabulary(), 3);
  for (auto kernel : {Kernel::kGsn, Kernel::kFixedOrder, Kernel::kMh}) {
    ChainConfig cfg;
    cfg.kernel = kernel;
    cfg.epochs = 60;
    cfg.burn_in = 5;
    cfg.lag = 3;
    cfg.epsilon = 0.05;
    cfg.seed = 31;
    const auto a = run_chain(local, cfg);
    const auto b = run_chain(remote, cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].tokens == b[i].tokens);
      CHECK(a[i].epoch == b[i].epoch);
      if (a[i].energy.finite()) {
        CHECK(std::abs(a[i].energy.value - b[i].energy.value) <= 1e-9);
      } else {
        CHECK_FALSE(b[i].energy.finite());
      }
    }
  }
}

TEST_CASE("endpoint is read from the environment") {
  ::setenv(kEndpointEnv, "http://example.invalid:1", 1);
  CHECK(endpoint_from_env() == std::optional<std::string>("http://example.invalid:1"));
  ::unsetenv(kEndpointEnv);
  CHECK_FALSE(endpoint_from_env().has_value());
}
