#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "gsnprobe/samplers.hpp"

namespace gsnprobe {

inline constexpr const char* kToolName = "gsnprobe";
inline constexpr const char* kToolVersion = "0.1.0";

// JSONL chain logs: one header object, then one object per record.
// Energies of -infinity are written as null.
nlohmann::json chain_header(const ChainConfig& config, const ConditionalModel& model,
                            std::size_t chains);
nlohmann::json config_to_json(const ChainConfig& config);
nlohmann::json record_to_json(const ChainRecord& record);
ChainRecord record_from_json(const nlohmann::json& j);

struct ChainLog {
  nlohmann::json header;
  std::vector<ChainRecord> records;
};

// Throws FormatError naming the offending line.
ChainLog read_chain_log(const std::filesystem::path& path);
ChainLog read_chain_log(std::istream& in, const std::string& name = "<stream>");

}  // namespace gsnprobe
