#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace gsnprobe {

// 64-bit FNV-1a; used for fingerprints and output content hashes.
class Fnv1a {
 public:
  void update(std::string_view bytes);
  void update_u64(std::uint64_t v);
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string hex64(std::uint64_t v);
std::string hash_file(const std::filesystem::path& path);

}  // namespace gsnprobe
