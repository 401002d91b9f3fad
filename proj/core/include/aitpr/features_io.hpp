#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "aitpr/scene.hpp"

namespace aitpr {

// Feature file: UTF-8 JSON {"dim": D, "v": [[...]], "v_prime": [[...]]}.
// Doubles are written in shortest round-trip form, so save/load is lossless.
void save_features(const std::filesystem::path& path, const RegionFeatureSet& features);
RegionFeatureSet load_features(const std::filesystem::path& path);

std::string features_to_json(const RegionFeatureSet& features);
// `source` names the origin in error messages.
RegionFeatureSet features_from_json(const std::string& text, const std::string& source = "<memory>");

// Caption file: one caption per line, space-separated lowercase tokens.
void save_captions(const std::filesystem::path& path, std::span<const std::string> captions);
std::vector<std::string> load_captions(const std::filesystem::path& path);

// Writes `content` to `path` through a sibling temporary file and a rename.
void write_file_atomically(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace aitpr
