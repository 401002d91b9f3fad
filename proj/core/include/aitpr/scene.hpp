#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aitpr/tensor.hpp"
#include "aitpr/vocabulary.hpp"

namespace aitpr {

enum class Predicate : std::uint32_t { LeftOf = 0, RightOf = 1, Above = 2, Below = 3 };
inline constexpr std::size_t kPredicateCount = 4;

struct SceneObject {
  std::uint32_t category = 0;
  std::uint32_t attribute = 0;
  std::uint32_t x = 0;
  std::uint32_t y = 0;

  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

struct Relation {
  std::size_t subject = 0;
  Predicate predicate = Predicate::LeftOf;
  std::size_t object = 0;

  friend bool operator==(const Relation&, const Relation&) = default;
};

struct Scene {
  std::vector<SceneObject> objects;
  std::vector<Relation> relations;

  friend bool operator==(const Scene&, const Scene&) = default;
};

struct SceneConfig {
  std::uint32_t grid_width = 4;
  std::uint32_t grid_height = 4;
  std::vector<std::string> categories{"square", "circle", "triangle", "star"};
  std::vector<std::string> attributes{"red", "blue", "green", "yellow"};
  std::vector<std::string> predicates{"left-of", "right-of", "above", "below"};
  std::size_t min_objects = 1;
  std::size_t max_objects = 6;
  // Chance that any given object pair becomes a relation.
  double relation_probability = 0.5;

  // Throws ConfigError on the first invalid field.
  void validate() const;
};

// Predicate of `subject` relative to `object`, from grid positions. The
// dominant axis wins; horizontal wins ties. y grows downward.
Predicate predicate_between(const SceneObject& subject, const SceneObject& object);

// Deterministic in (seed, config). Objects occupy distinct grid cells;
// relations are a subset of the ordered pairs (i, j), i < j, and there is at
// least one whenever two or more objects exist.
Scene generate_scene(std::uint64_t seed, const SceneConfig& config);

// Vocabulary covering the caption grammar: "a", attributes, categories, predicates.
Vocabulary build_vocabulary(const SceneConfig& config);

// Reference captions as text. One sentence per relation
// ("a red square left-of a blue circle"); a scene without relations yields
// "a <attr> <cat>" for its first object.
std::vector<std::string> caption_texts(const Scene& scene, const SceneConfig& config);

// Tokenised references. Throws CoverageError naming any word missing from `vocab`.
std::vector<TokenSequence> caption_oracle(const Scene& scene, const SceneConfig& config, const Vocabulary& vocab);

// Attribute vectors v (k1 x D), interaction vectors v' (k2 x D) and the mean v_bar of v.
class RegionFeatureSet {
 public:
  RegionFeatureSet() = default;
  // v_prime may be empty (k2 = 0).
  RegionFeatureSet(Tensor v, Tensor v_prime);

  const Tensor& v() const { return v_; }
  const Tensor& v_prime() const { return v_prime_; }
  const Tensor& v_bar() const { return v_bar_; }
  std::size_t dim() const { return v_.empty() ? 0 : v_.dim(1); }
  std::size_t attribute_count() const { return v_.empty() ? 0 : v_.dim(0); }
  std::size_t interaction_count() const { return v_prime_.empty() ? 0 : v_prime_.dim(0); }
  // All k1 + k2 rows stacked attributes first.
  Tensor all_rows() const;
  // Mean of every attribute and interaction row.
  Tensor pooled_mean() const;

  friend bool operator==(const RegionFeatureSet&, const RegionFeatureSet&) = default;

 private:
  Tensor v_;
  Tensor v_prime_;
  Tensor v_bar_;
};

// Fixed prototype vectors per (category, attribute) and one projection per
// predicate. Built once per dataset from a world seed; shared by every scene.
class FeatureSpace {
 public:
  static constexpr std::uint64_t kDefaultWorldSeed = 0x5eedc0de;

  FeatureSpace(std::size_t dim, const SceneConfig& config, std::uint64_t world_seed = kDefaultWorldSeed);

  std::size_t dim() const { return dim_; }
  const Tensor& prototype(std::uint32_t category, std::uint32_t attribute) const;
  // tanh(P_p [a; b])
  Tensor interaction_compose(const Tensor& a, const Tensor& b, Predicate p) const;

 private:
  std::size_t dim_;
  std::size_t attribute_count_;
  std::vector<Tensor> prototypes_;   // indexed category * attributes + attribute
  std::vector<Tensor> projections_;  // [D x 2D] per predicate
};

// v_i = prototype + N(0, sigma^2) noise; v'_r composes the two (noisy)
// endpoint vectors of relation r. Throws InputError for an empty scene.
RegionFeatureSet scene_to_features(const Scene& scene, const FeatureSpace& space, double noise_sigma, std::uint64_t seed);

}  // namespace aitpr
