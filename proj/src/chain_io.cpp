#include "gsnprobe/chain_io.hpp"

#include <fstream>
#include <istream>

#include "gsnprobe/error.hpp"

namespace gsnprobe {

namespace {

std::string kind_name(RecordKind kind) {
  switch (kind) {
    case RecordKind::kSample: return "sample";
    case RecordKind::kEpoch: return "epoch";
    case RecordKind::kTruncated: return "truncated";
  }
  return "unknown";
}

}  // namespace

nlohmann::json config_to_json(const ChainConfig& config) {
  nlohmann::json j;
  j["epochs"] = config.epochs;
  j["burn_in"] = config.burn_in;
  j["lag"] = config.lag;
  j["epsilon"] = config.epsilon;
  j["kernel"] = to_string(config.kernel);
  j["order"] = config.order ? nlohmann::json(*config.order) : nlohmann::json(nullptr);
  j["seed"] = config.seed;
  j["trace"] = config.trace;
  return j;
}

nlohmann::json chain_header(const ChainConfig& config, const ConditionalModel& model,
                            std::size_t chains) {
  nlohmann::json j;
  j["type"] = "header";
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["config"] = config_to_json(config);
  j["model"] = model.fingerprint();
  j["length"] = model.length();
  j["vocab_size"] = model.vocabulary().size();
  j["seed"] = config.seed;
  j["rng"] = Rng::kAlgorithm;
  j["chains"] = chains;
  return j;
}

nlohmann::json record_to_json(const ChainRecord& r) {
  nlohmann::json j;
  j["type"] = kind_name(r.kind);
  j["chain_id"] = r.chain_id;
  j["epoch"] = r.epoch;
  j["tokens"] = std::vector<TokenId>(r.tokens.begin(), r.tokens.end());
  j["text"] = r.text;
  j["energy"] = r.energy.finite() ? nlohmann::json(r.energy.value) : nlohmann::json(nullptr);
  j["edits"] = r.edits;
  j["epochs_since_reset"] = r.epochs_since_reset;
  if (r.kind == RecordKind::kTruncated) j["reason"] = r.reason;
  return j;
}

ChainRecord record_from_json(const nlohmann::json& j) {
  ChainRecord r;
  const auto type = j.at("type").get<std::string>();
  if (type == "sample") {
    r.kind = RecordKind::kSample;
  } else if (type == "epoch") {
    r.kind = RecordKind::kEpoch;
  } else if (type == "truncated") {
    r.kind = RecordKind::kTruncated;
    r.reason = j.value("reason", "");
  } else {
    throw FormatError("unknown record type '" + type + "'");
  }
  r.chain_id = j.at("chain_id").get<std::uint64_t>();
  r.epoch = j.at("epoch").get<std::uint64_t>();
  r.tokens = TokenSequence(j.at("tokens").get<std::vector<TokenId>>());
  r.text = j.value("text", "");
  if (!j.contains("energy")) throw FormatError("record is missing its energy field");
  const auto& e = j.at("energy");
  r.energy = {e.is_null() ? kNegInf : e.get<double>()};
  r.edits = j.at("edits").get<std::size_t>();
  r.epochs_since_reset = j.at("epochs_since_reset").get<std::uint64_t>();
  return r;
}

ChainLog read_chain_log(std::istream& in, const std::string& name) {
  ChainLog log;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      if (j.value("type", "") == "header") {
        log.header = std::move(j);
      } else {
        log.records.push_back(record_from_json(j));
      }
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(name + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(name + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return log;
}

ChainLog read_chain_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open chain log " + path.string());
  return read_chain_log(in, path.string());
}

}  // namespace gsnprobe
