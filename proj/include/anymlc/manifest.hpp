#ifndef ANYMLC_MANIFEST_HPP_
#define ANYMLC_MANIFEST_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace anymlc {

// FNV-1a 64-bit digest of a file's bytes, hex-encoded. Used to pin run inputs
// and to compare outputs for reproducibility; not a cryptographic hash.
std::string file_digest(const std::filesystem::path& path);

// Record of one CLI run. Written with completed = false before any work
// starts and finalized afterwards, so an interrupted run is visibly partial.
// Re-invoking the stored argv reproduces the outputs byte for byte.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> input_digests;
  std::vector<std::string> outputs;
  std::string started_at;
  std::string completed_at;
  bool completed = false;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
  void write(const std::filesystem::path& path) const;
  static RunManifest read(const std::filesystem::path& path);
};

std::string iso8601_now();

}  // namespace anymlc

#endif  // ANYMLC_MANIFEST_HPP_
