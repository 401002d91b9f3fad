#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace aitpr::cli {

// Record written as manifest.json next to every run's outputs.
struct RunManifest {
  std::string command;
  std::string config_json;  // canonical (sorted-key) JSON of the effective config
  std::uint64_t seed = 0;
  std::string started_at;
  std::string finished_at;
  std::vector<std::string> artifacts;  // relative to the manifest directory
  int exit_code = 0;

  std::string config_hash() const;
  void write(const std::filesystem::path& path) const;
};

// Key-order independent: parses and re-serialises with sorted keys.
std::string canonical_json(const std::string& json_text);
// FNV-1a 64 of canonical_json(json_text), as 16 hex digits.
std::string config_hash(const std::string& json_text);

// ISO-8601 UTC. Honours SOURCE_DATE_EPOCH so that reproducible runs produce
// identical manifests.
std::string utc_timestamp();

}  // namespace aitpr::cli
