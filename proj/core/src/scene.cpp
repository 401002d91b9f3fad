#include "aitpr/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "aitpr/errors.hpp"

namespace aitpr {

void SceneConfig::validate() const {
  if (grid_width < 2 || grid_height < 2) throw ConfigError("scene config: grid must be at least 2x2");
  if (categories.size() < 2) throw ConfigError("scene config: at least 2 categories are required");
  if (attributes.empty()) throw ConfigError("scene config: at least 1 attribute is required");
  if (predicates.size() != kPredicateCount) {
    throw ConfigError("scene config: exactly " + std::to_string(kPredicateCount) + " predicate words are required");
  }
  if (min_objects < 1 || max_objects < min_objects) {
    throw ConfigError("scene config: need 1 <= min_objects <= max_objects");
  }
  if (max_objects > static_cast<std::size_t>(grid_width) * grid_height) {
    throw ConfigError("scene config: max_objects exceeds the number of grid cells");
  }
  if (!(relation_probability >= 0.0 && relation_probability <= 1.0)) {
    throw ConfigError("scene config: relation_probability must lie in [0, 1]");
  }
}

Predicate predicate_between(const SceneObject& subject, const SceneObject& object) {
  const long dx = static_cast<long>(object.x) - static_cast<long>(subject.x);
  const long dy = static_cast<long>(object.y) - static_cast<long>(subject.y);
  if (std::labs(dx) >= std::labs(dy)) return dx > 0 ? Predicate::LeftOf : Predicate::RightOf;
  return dy > 0 ? Predicate::Above : Predicate::Below;
}

Scene generate_scene(std::uint64_t seed, const SceneConfig& config) {
  config.validate();
  std::mt19937_64 rng(seed);

  std::uniform_int_distribution<std::size_t> count_dist(config.min_objects, config.max_objects);
  const std::size_t count = count_dist(rng);

  std::vector<std::uint32_t> cells(static_cast<std::size_t>(config.grid_width) * config.grid_height);
  std::iota(cells.begin(), cells.end(), 0u);
  // Partial Fisher-Yates with explicit draws so the result does not depend on std::shuffle.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, cells.size() - 1);
    std::swap(cells[i], cells[pick(rng)]);
  }

  std::uniform_int_distribution<std::uint32_t> cat_dist(0, static_cast<std::uint32_t>(config.categories.size() - 1));
  std::uniform_int_distribution<std::uint32_t> attr_dist(0, static_cast<std::uint32_t>(config.attributes.size() - 1));
  Scene scene;
  for (std::size_t i = 0; i < count; ++i) {
    SceneObject obj;
    obj.category = cat_dist(rng);
    obj.attribute = attr_dist(rng);
    obj.x = cells[i] % config.grid_width;
    obj.y = cells[i] / config.grid_width;
    scene.objects.push_back(obj);
  }

  std::bernoulli_distribution keep(config.relation_probability);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = i + 1; j < count; ++j) {
      if (keep(rng)) scene.relations.push_back({i, predicate_between(scene.objects[i], scene.objects[j]), j});
    }
  }
  if (count >= 2 && scene.relations.empty()) {
    scene.relations.push_back({0, predicate_between(scene.objects[0], scene.objects[1]), 1});
  }
  return scene;
}

Vocabulary build_vocabulary(const SceneConfig& config) {
  Vocabulary vocab;
  vocab.add("a");
  for (const auto& w : config.attributes) vocab.add(w);
  for (const auto& w : config.categories) vocab.add(w);
  for (const auto& w : config.predicates) vocab.add(w);
  return vocab;
}

namespace {

std::string noun_phrase(const SceneObject& obj, const SceneConfig& config) {
  return "a " + config.attributes.at(obj.attribute) + " " + config.categories.at(obj.category);
}

}  // namespace

std::vector<std::string> caption_texts(const Scene& scene, const SceneConfig& config) {
  if (scene.objects.empty()) throw InputError("caption_texts: scene has no objects");
  std::vector<std::string> out;
  for (const auto& rel : scene.relations) {
    out.push_back(noun_phrase(scene.objects.at(rel.subject), config) + " " +
                  config.predicates.at(static_cast<std::size_t>(rel.predicate)) + " " +
                  noun_phrase(scene.objects.at(rel.object), config));
  }
  if (out.empty()) out.push_back(noun_phrase(scene.objects.front(), config));
  return out;
}

std::vector<TokenSequence> caption_oracle(const Scene& scene, const SceneConfig& config, const Vocabulary& vocab) {
  std::vector<TokenSequence> out;
  for (const auto& text : caption_texts(scene, config)) {
    std::vector<TokenId> ids;
    for (const auto& w : split_tokens(text)) {
      auto id = vocab.find(w);
      if (!id) throw CoverageError("vocabulary does not cover caption word '" + w + "'");
      ids.push_back(*id);
    }
    out.push_back(TokenSequence::frame(ids));
  }
  return out;
}

RegionFeatureSet::RegionFeatureSet(Tensor v, Tensor v_prime) : v_(std::move(v)), v_prime_(std::move(v_prime)) {
  if (v_.rank() != 2 || v_.empty()) throw InputError("region features need at least one attribute vector");
  if (!v_prime_.empty() && (v_prime_.rank() != 2 || v_prime_.dim(1) != v_.dim(1))) {
    throw DimensionError("interaction vectors " + shape_to_string(v_prime_.shape()) + " do not match attribute dim " +
                         std::to_string(v_.dim(1)));
  }
  v_bar_ = mean_rows(v_);
}

Tensor RegionFeatureSet::all_rows() const {
  if (v_prime_.empty()) return v_;
  std::vector<double> values(v_.data().begin(), v_.data().end());
  values.insert(values.end(), v_prime_.data().begin(), v_prime_.data().end());
  return Tensor({attribute_count() + interaction_count(), dim()}, std::move(values));
}

Tensor RegionFeatureSet::pooled_mean() const { return mean_rows(all_rows()); }

FeatureSpace::FeatureSpace(std::size_t dim, const SceneConfig& config, std::uint64_t world_seed)
    : dim_(dim), attribute_count_(config.attributes.size()) {
  if (dim < 8) throw ConfigError("feature dimension must be at least 8, got " + std::to_string(dim));
  config.validate();
  std::mt19937_64 rng(world_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (std::size_t c = 0; c < config.categories.size(); ++c) {
    for (std::size_t a = 0; a < config.attributes.size(); ++a) {
      Tensor proto({dim});
      double norm = 0.0;
      for (auto& x : proto.data()) {
        x = gauss(rng);
        norm += x * x;
      }
      prototypes_.push_back(scale(proto, 1.0 / std::sqrt(norm)));
    }
  }
  const double proj_scale = 1.0 / std::sqrt(static_cast<double>(2 * dim));
  for (std::size_t p = 0; p < kPredicateCount; ++p) {
    Tensor proj({dim, 2 * dim});
    for (auto& x : proj.data()) x = gauss(rng) * proj_scale * 2.0;
    projections_.push_back(std::move(proj));
  }
}

const Tensor& FeatureSpace::prototype(std::uint32_t category, std::uint32_t attribute) const {
  const std::size_t idx = static_cast<std::size_t>(category) * attribute_count_ + attribute;
  if (attribute >= attribute_count_ || idx >= prototypes_.size()) throw InputError("prototype index out of range");
  return prototypes_[idx];
}

Tensor FeatureSpace::interaction_compose(const Tensor& a, const Tensor& b, Predicate p) const {
  if (a.size() != dim_ || b.size() != dim_) throw DimensionError("interaction_compose: operands must have dim " + std::to_string(dim_));
  const Tensor& proj = projections_.at(static_cast<std::size_t>(p));
  Tensor out({dim_});
  for (std::size_t i = 0; i < dim_; ++i) {
    auto row = proj.row_span(i);
    out[i] = std::tanh(dot(row.first(dim_), a.data()) + dot(row.subspan(dim_), b.data()));
  }
  return out;
}

RegionFeatureSet scene_to_features(const Scene& scene, const FeatureSpace& space, double noise_sigma, std::uint64_t seed) {
  if (scene.objects.empty()) throw InputError("scene_to_features: scene has no objects");
  if (noise_sigma < 0.0) throw ConfigError("scene_to_features: noise_sigma must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<Tensor> attrs;
  for (const auto& obj : scene.objects) {
    Tensor v = space.prototype(obj.category, obj.attribute);
    if (noise_sigma > 0.0) {
      for (auto& x : v.data()) x += noise_sigma * gauss(rng);
    }
    attrs.push_back(std::move(v));
  }
  std::vector<Tensor> inters;
  for (const auto& rel : scene.relations) {
    inters.push_back(space.interaction_compose(attrs.at(rel.subject), attrs.at(rel.object), rel.predicate));
  }
  return RegionFeatureSet(stack_rows(attrs), inters.empty() ? Tensor() : stack_rows(inters));
}

}  // namespace aitpr
