#include "gsnprobe/remote.hpp"

#include <cmath>
#include <cstdlib>
#include <map>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "gsnprobe/error.hpp"
#include "gsnprobe/hash.hpp"

namespace gsnprobe::remote {

namespace {

using nlohmann::json;

void configure(httplib::Client& client, const Endpoint& endpoint) {
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
}

// Sends with retries on transport errors and 5xx responses. 4xx is final.
json exchange(const Endpoint& endpoint, const std::string& path, const json* body) {
  std::string last_error;
  const int attempts = 1 + std::max(0, endpoint.retries);
  auto delay = endpoint.backoff;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    httplib::Client client(endpoint.base_url);
    configure(client, endpoint);
    auto res = body ? client.Post(path, body->dump(), "application/json") : client.Get(path);
    if (!res) {
      last_error = httplib::to_string(res.error());
    } else if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
    } else if (res->status != 200) {
      throw ProtocolError(endpoint.base_url + path + " returned HTTP " +
                          std::to_string(res->status) + ": " + res->body);
    } else {
      try {
        return json::parse(res->body);
      } catch (const json::exception& e) {
        throw ProtocolError(endpoint.base_url + path + " returned malformed JSON: " + e.what());
      }
    }
    if (attempt < attempts) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
  }
  throw ConnectionError(endpoint.base_url + path + " failed after " + std::to_string(attempts) +
                            " attempts: " + last_error,
                        attempts);
}

}  // namespace

std::optional<std::string> endpoint_from_env() {
  if (const char* v = std::getenv(kEndpointEnv); v != nullptr && *v != '\0') return std::string(v);
  return std::nullopt;
}

ModelInfo fetch_info(const Endpoint& endpoint) {
  const json j = exchange(endpoint, "/v1/info", nullptr);
  try {
    ModelInfo info;
    info.model = j.at("model").get<std::string>();
    info.vocab_size = j.at("vocab_size").get<std::size_t>();
    info.mask_id = j.at("mask_id").get<TokenId>();
    info.max_len = j.at("max_len").get<std::size_t>();
    return info;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed /v1/info payload: ") + e.what());
  }
}

void check_info(const ModelInfo& info, const Vocabulary& vocab) {
  if (info.vocab_size != vocab.size()) {
    throw ConfigError("server vocab_size " + std::to_string(info.vocab_size) +
                      " does not match local vocabulary size " + std::to_string(vocab.size()));
  }
  if (info.mask_id != vocab.mask_id()) {
    throw ConfigError("server mask_id " + std::to_string(info.mask_id) +
                      " does not match local mask id " + std::to_string(vocab.mask_id()));
  }
}

std::vector<double> normalize_log_probs(std::span<const double> log_probs) {
  double top = kNegInf;
  for (double x : log_probs) {
    if (std::isnan(x)) throw ProtocolError("NaN log-probability in payload");
    top = std::max(top, x);
  }
  if (top == kNegInf) throw ProtocolError("log-probability row has no finite entry");
  std::vector<double> p(log_probs.size());
  double z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = log_probs[i] == kNegInf ? 0.0 : std::exp(log_probs[i] - top);
    z += p[i];
  }
  for (auto& x : p) x /= z;
  return p;
}

QueryResult query_conditionals(const Endpoint& endpoint, std::span<const TokenId> tokens,
                               std::span<const std::size_t> positions) {
  QueryResult result;
  if (positions.empty()) return result;
  json body;
  body["tokens"] = std::vector<TokenId>(tokens.begin(), tokens.end());
  body["positions"] = std::vector<std::size_t>(positions.begin(), positions.end());
  const json reply = exchange(endpoint, "/v1/conditional", &body);

  const bool logs = reply.contains("log_probs");
  if (!logs && !reply.contains("probs")) {
    throw ProtocolError("conditional payload lacks log_probs");
  }
  const json& rows = logs ? reply.at("log_probs") : reply.at("probs");
  if (!rows.is_array() || rows.size() != positions.size()) {
    throw ProtocolError("conditional payload has " + std::to_string(rows.size()) +
                        " rows for " + std::to_string(positions.size()) + " positions");
  }
  std::map<std::size_t, std::string> reasons;
  if (reply.contains("errors")) {
    for (const auto& e : reply.at("errors")) {
      reasons[e.value("position", std::size_t{0})] = e.value("message", "server error");
    }
  }
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const auto& row = rows[i];
    if (row.is_null()) {
      result.vectors.emplace_back(std::nullopt);
      auto it = reasons.find(positions[i]);
      result.failures.emplace_back(positions[i], it == reasons.end() ? "server error" : it->second);
      continue;
    }
    if (!row.is_array()) throw ProtocolError("conditional row is not an array");
    std::vector<double> values;
    values.reserve(row.size());
    for (const auto& x : row) {
      if (x.is_null()) {
        values.push_back(logs ? kNegInf : 0.0);
      } else if (x.is_number()) {
        values.push_back(x.get<double>());
      } else {
        throw ProtocolError("non-numeric entry in conditional row");
      }
    }
    if (logs) {
      result.vectors.emplace_back(normalize_log_probs(values));
    } else {
      double z = 0.0;
      for (double v : values) {
        if (!(v >= 0.0)) throw ProtocolError("negative probability in payload");
        z += v;
      }
      if (!(z > 0.0)) throw ProtocolError("probability row sums to zero");
      for (auto& v : values) v /= z;
      result.vectors.emplace_back(std::move(values));
    }
  }
  return result;
}

// ------------------------------------------------------------- RemoteModel

RemoteModel::RemoteModel(Endpoint endpoint, Vocabulary vocab, std::size_t length)
    : endpoint_(std::move(endpoint)), vocab_(std::move(vocab)), length_(length) {
  info_ = fetch_info(endpoint_);
  check_info(info_, vocab_);
  if (length_ == 0 || length_ > info_.max_len) {
    throw ConfigError("sequence length " + std::to_string(length_) +
                      " outside the server's supported range 1.." + std::to_string(info_.max_len));
  }
}

std::string RemoteModel::fingerprint() const {
  return "remote:" + info_.model + ":" + hex64(vocab_.fingerprint());
}

std::vector<double> RemoteModel::conditional_at(const TokenSequence& masked, std::size_t site) const {
  const std::size_t positions[] = {site};
  auto r = query_conditionals(endpoint_, masked.ids(), positions);
  if (!r.complete()) {
    throw BackendError("server failed at position " + std::to_string(site) + ": " +
                       r.failures.front().second);
  }
  return std::move(*r.vectors.front());
}

std::vector<std::vector<double>> RemoteModel::conditionals_at(
    const TokenSequence& seq, std::span<const std::size_t> sites) const {
  auto r = query_conditionals(endpoint_, seq.ids(), sites);
  if (!r.complete()) {
    std::string failed;
    for (const auto& [pos, why] : r.failures) {
      failed += (failed.empty() ? "" : ", ") + std::to_string(pos) + " (" + why + ")";
    }
    throw BackendError("server failed at positions " + failed);
  }
  std::vector<std::vector<double>> out;
  out.reserve(r.vectors.size());
  for (auto& v : r.vectors) out.push_back(std::move(*v));
  return out;
}

// ---------------------------------------------------------- ProtocolServer

struct ProtocolServer::Impl {
  const ConditionalModel& model;
  std::string name;
  httplib::Server server;
  std::thread thread;

  Impl(const ConditionalModel& m, std::string n) : model(m), name(std::move(n)) {}
};

namespace {

void bad_request(httplib::Response& res, const std::string& why) {
  res.status = 400;
  res.set_content(json{{"error", why}}.dump(), "application/json");
}

}  // namespace

ProtocolServer::ProtocolServer(const ConditionalModel& model, std::string name)
    : impl_(std::make_unique<Impl>(model, std::move(name))) {
  auto& svr = impl_->server;
  Impl* impl = impl_.get();
  svr.Get("/v1/info", [impl](const httplib::Request&, httplib::Response& res) {
    json j{{"model", impl->name},
           {"vocab_size", impl->model.vocabulary().size()},
           {"mask_id", impl->model.vocabulary().mask_id()},
           {"max_len", impl->model.length()}};
    res.set_content(j.dump(), "application/json");
  });
  svr.Post("/v1/conditional", [impl](const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception& e) {
      return bad_request(res, std::string("malformed JSON: ") + e.what());
    }
    std::vector<TokenId> tokens;
    std::vector<std::size_t> positions;
    try {
      tokens = body.at("tokens").get<std::vector<TokenId>>();
      positions = body.at("positions").get<std::vector<std::size_t>>();
    } catch (const json::exception& e) {
      return bad_request(res, std::string("expected tokens and positions: ") + e.what());
    }
    const auto& model = impl->model;
    if (tokens.size() != model.length()) {
      return bad_request(res, "sequence length " + std::to_string(tokens.size()) +
                                  " does not match served length " + std::to_string(model.length()));
    }
    for (auto t : tokens) {
      if (t >= model.vocabulary().size()) return bad_request(res, "token id out of range");
    }
    for (auto p : positions) {
      if (p >= tokens.size()) {
        return bad_request(res, "position " + std::to_string(p) + " >= length " +
                                    std::to_string(tokens.size()));
      }
    }
    const TokenSequence seq(tokens);
    json rows = json::array();
    json errors = json::array();
    for (auto p : positions) {
      try {
        const auto probs = model.query(seq, p);
        json row = json::array();
        for (double x : probs) {
          if (x > 0.0) {
            row.push_back(std::log(x));
          } else {
            row.push_back(nullptr);
          }
        }
        rows.push_back(std::move(row));
      } catch (const std::exception& e) {
        rows.push_back(nullptr);
        errors.push_back({{"position", p}, {"message", e.what()}});
      }
    }
    json reply{{"log_probs", std::move(rows)}};
    if (!errors.empty()) reply["errors"] = std::move(errors);
    res.set_content(reply.dump(), "application/json");
  });
}

ProtocolServer::~ProtocolServer() { stop(); }

int ProtocolServer::start(const std::string& host, int port) {
  auto& svr = impl_->server;
  port_ = port == 0 ? svr.bind_to_any_port(host) : (svr.bind_to_port(host, port) ? port : -1);
  if (port_ <= 0) throw ConnectionError("cannot bind " + host + ":" + std::to_string(port), 1);
  host_ = host;
  impl_->thread = std::thread([&svr] { svr.listen_after_bind(); });
  svr.wait_until_ready();
  return port_;
}

void ProtocolServer::serve_forever(const std::string& host, int port) {
  host_ = host;
  port_ = port;
  if (!impl_->server.listen(host, port)) {
    throw ConnectionError("cannot listen on " + host + ":" + std::to_string(port), 1);
  }
}

void ProtocolServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string ProtocolServer::url() const {
  return "http://" + host_ + ":" + std::to_string(port_);
}

}  // namespace gsnprobe::remote
