#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aitpr/scene.hpp"
#include "aitpr/vocabulary.hpp"

namespace aitpr {

// One image: its region features and reference captions. The first reference
// is the training target.
struct Example {
  std::string name;
  RegionFeatureSet features;
  std::vector<TokenSequence> references;

  const TokenSequence& target() const { return references.front(); }
};

struct Dataset {
  Vocabulary vocab;
  std::vector<Example> examples;

  std::size_t feature_dim() const { return examples.empty() ? 0 : examples.front().features.dim(); }
};

struct SynthConfig {
  std::size_t scenes = 10;
  std::uint64_t seed = 0;
  SceneConfig scene;
  std::size_t feature_dim = 64;
  double noise_sigma = 0.05;
  std::uint64_t world_seed = FeatureSpace::kDefaultWorldSeed;
};

Dataset synthesize_dataset(const SynthConfig& config);

// Layout: vocab.txt, scene_NNNNN.json (features), scene_NNNNN.txt (captions).
void save_dataset(const std::filesystem::path& dir, const Dataset& dataset);
// Throws IoError if `dir` is missing, FormatError/CoverageError on bad contents.
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace aitpr
