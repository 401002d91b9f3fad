#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "aitpr/dataset.hpp"
#include "aitpr/decoder.hpp"
#include "aitpr/errors.hpp"
#include "aitpr/params.hpp"

namespace aitpr {

struct TrainConfig {
  std::size_t epochs = 100;
  double learning_rate = 1e-3;
  std::size_t batch_size = 1;
  std::uint64_t seed = 0;
  FusionMode fusion = FusionMode::Late;
  int variant = 3;
  // feature and vocab are taken from the dataset when training.
  ModelDims dims{};
  double grad_clip = 5.0;
  double init_scale = 0.08;
  bool attribute_only_fallback = true;
  std::size_t max_caption_len = 16;

  void validate() const;
  DecoderOptions decoder_options() const;

  // Flat JSON object; unknown keys are rejected. Missing keys keep defaults.
  std::string to_json() const;
  static TrainConfig from_json(const std::string& text);
  // Applies the keys present in `text` on top of *this.
  void merge_json(const std::string& text);
};

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t step = 0;

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected Adam update of every parameter tensor.
void adam_update(ModelParams& params, std::span<const Tensor> grads, AdamState& state, double learning_rate,
                 const AdamOptions& options = {});

double global_norm(std::span<const Tensor> grads);
// Rescales so the global L2 norm is at most `threshold`. Returns the norm before clipping.
double clip_gradients(std::span<Tensor> grads, double threshold);

// Mean negative log-likelihood of target[1..] under per-step logits. Positions
// whose target is <pad> are skipped. Requires logits.size() == target.size() - 1.
Var sequence_loss(std::span<const Var> logits, std::span<const TokenId> target);
double sequence_loss(std::span<const Tensor> logits, std::span<const TokenId> target);

// Teacher-forced loss of one example and its gradient for every parameter.
double example_loss_and_gradients(const ModelParams& params, const Example& example, const DecoderOptions& options,
                                  std::vector<Tensor>* grads);

struct TrainState {
  TrainConfig config;
  ModelParams params;
  AdamState adam;
  std::mt19937_64 rng;
  std::size_t epoch = 0;
  std::vector<double> loss_trace;  // mean example loss per completed epoch
};

// Fresh state: parameters drawn from config.seed, shuffling RNG seeded from it too.
TrainState initial_train_state(const Dataset& dataset, const TrainConfig& config);

// Raised when a loss or gradient becomes non-finite. Carries the state at the
// end of the last completed epoch.
class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& what, TrainState last_good)
      : NumericError(what), last_good_(std::move(last_good)) {}
  const TrainState& last_good() const { return last_good_; }

 private:
  TrainState last_good_;
};

using EpochCallback = std::function<void(const TrainState&)>;

// Runs epochs until state.epoch == state.config.epochs. Each epoch shuffles
// the examples with state.rng and applies one Adam step per mini-batch of
// averaged, clipped gradients.
void train(const Dataset& dataset, TrainState& state, const EpochCallback& on_epoch = {});

// Convenience: initial state + train.
TrainState train(const Dataset& dataset, const TrainConfig& config, const EpochCallback& on_epoch = {});

std::vector<TokenSequence> decode_dataset(const Dataset& dataset, const ModelParams& params,
                                          const DecoderOptions& options, std::size_t max_len);

}  // namespace aitpr
