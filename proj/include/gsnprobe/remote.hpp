#pragma once

// HTTP client for externally served masked-LM conditionals, and a server
// that exposes any ConditionalModel over the same protocol.
//
//   GET  /v1/info        -> {"model", "vocab_size", "mask_id", "max_len"}
//   POST /v1/conditional {"tokens": [ids], "positions": [ints]}
//                        -> {"log_probs": [[floats]]}
//
// The server masks each requested position itself. A null vector marks a
// failed position; a null entry inside a vector is a log-probability of
// -infinity.

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gsnprobe/conditional_model.hpp"

namespace gsnprobe::remote {

inline constexpr const char* kEndpointEnv = "GSNPROBE_ENDPOINT";

struct Endpoint {
  std::string base_url = "http://127.0.0.1:8080";
  std::chrono::milliseconds timeout{30000};
  int retries = 3;
  std::chrono::milliseconds backoff{200};  // doubled after each failed attempt
};

// Endpoint from GSNPROBE_ENDPOINT, if set.
std::optional<std::string> endpoint_from_env();

struct ModelInfo {
  std::string model;
  std::size_t vocab_size = 0;
  TokenId mask_id = 0;
  std::size_t max_len = 0;
};

ModelInfo fetch_info(const Endpoint& endpoint);

// Throws ConfigError naming both sides when the server disagrees with the
// local vocabulary.
void check_info(const ModelInfo& info, const Vocabulary& vocab);

struct QueryResult {
  std::vector<std::optional<std::vector<double>>> vectors;  // one per position
  std::vector<std::pair<std::size_t, std::string>> failures;  // position, reason
  bool complete() const { return failures.empty(); }
};

// Probability vectors for each position, normalized client-side.
QueryResult query_conditionals(const Endpoint& endpoint, std::span<const TokenId> tokens,
                               std::span<const std::size_t> positions);

// exp-normalizes a log-probability row (entries may be -infinity).
std::vector<double> normalize_log_probs(std::span<const double> log_probs);

// ConditionalModel over the wire. Server info is fetched once, on
// construction, and validated against `vocab`.
class RemoteModel final : public ConditionalModel {
 public:
  RemoteModel(Endpoint endpoint, Vocabulary vocab, std::size_t length);

  const Vocabulary& vocabulary() const override { return vocab_; }
  std::size_t length() const override { return length_; }
  std::string fingerprint() const override;
  const ModelInfo& info() const { return info_; }

 protected:
  std::vector<double> conditional_at(const TokenSequence& masked, std::size_t site) const override;
  std::vector<std::vector<double>> conditionals_at(const TokenSequence& seq,
                                                   std::span<const std::size_t> sites) const override;

 private:
  Endpoint endpoint_;
  Vocabulary vocab_;
  std::size_t length_;
  ModelInfo info_;
};

// Serves a local ConditionalModel over the protocol on a background thread.
class ProtocolServer {
 public:
  ProtocolServer(const ConditionalModel& model, std::string name);
  ~ProtocolServer();
  ProtocolServer(const ProtocolServer&) = delete;
  ProtocolServer& operator=(const ProtocolServer&) = delete;

  // Binds (port 0 picks a free port) and starts serving; returns the port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Blocks serving in the calling thread.
  void serve_forever(const std::string& host, int port);
  void stop();
  int port() const { return port_; }
  std::string url() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
  std::string host_;
};

}  // namespace gsnprobe::remote
