#include "aitpr/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

#include "aitpr/errors.hpp"
#include "aitpr/features_io.hpp"

namespace aitpr {

namespace fs = std::filesystem;

namespace {

std::string scene_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%05zu", i);
  return buf;
}

}  // namespace

Dataset synthesize_dataset(const SynthConfig& config) {
  config.scene.validate();
  const FeatureSpace space(config.feature_dim, config.scene, config.world_seed);
  Dataset data;
  data.vocab = build_vocabulary(config.scene);

  std::mt19937_64 root(config.seed);
  for (std::size_t i = 0; i < config.scenes; ++i) {
    const std::uint64_t scene_seed = root();
    const std::uint64_t noise_seed = root();
    const Scene scene = generate_scene(scene_seed, config.scene);
    Example ex;
    ex.name = scene_name(i);
    ex.features = scene_to_features(scene, space, config.noise_sigma, noise_seed);
    ex.references = caption_oracle(scene, config.scene, data.vocab);
    data.examples.push_back(std::move(ex));
  }
  return data;
}

void save_dataset(const fs::path& dir, const Dataset& dataset) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create dataset directory " + dir.string());
  dataset.vocab.save(dir / "vocab.txt");
  for (const auto& ex : dataset.examples) {
    save_features(dir / (ex.name + ".json"), ex.features);
    std::vector<std::string> texts;
    for (const auto& ref : ex.references) texts.push_back(detokenize(ref, dataset.vocab));
    save_captions(dir / (ex.name + ".txt"), texts);
  }
}

Dataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("dataset directory not found: " + dir.string());
  Dataset data;
  data.vocab = Vocabulary::load(dir / "vocab.txt");

  std::vector<fs::path> feature_files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto& p = entry.path();
    if (entry.is_regular_file() && p.extension() == ".json" && p.stem().string().rfind("scene_", 0) == 0) {
      feature_files.push_back(p);
    }
  }
  std::sort(feature_files.begin(), feature_files.end());

  for (const auto& path : feature_files) {
    Example ex;
    ex.name = path.stem().string();
    ex.features = load_features(path);
    auto caption_path = path;
    caption_path.replace_extension(".txt");
    for (const auto& text : load_captions(caption_path)) {
      std::vector<TokenId> ids;
      for (const auto& w : split_tokens(text)) {
        auto id = data.vocab.find(w);
        if (!id) throw CoverageError(caption_path.string() + ": word '" + w + "' is not in the vocabulary");
        ids.push_back(*id);
      }
      ex.references.push_back(TokenSequence::frame(ids));
    }
    if (ex.references.empty()) throw FormatError(caption_path.string() + ": no captions");
    if (!data.examples.empty() && ex.features.dim() != data.feature_dim()) {
      throw FormatError(path.string() + ": feature dim " + std::to_string(ex.features.dim()) + " differs from " +
                        std::to_string(data.feature_dim()));
    }
    data.examples.push_back(std::move(ex));
  }
  return data;
}

}  // namespace aitpr
