#include "aitpr/training.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "aitpr/errors.hpp"

namespace aitpr {

using nlohmann::json;

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("train config: epochs must be positive");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("train config: learning_rate must be finite and non-negative");
  }
  if (batch_size == 0) throw ConfigError("train config: batch_size must be positive");
  if (variant < 1 || variant > 3) throw ConfigError("train config: variant must be one of {1,2,3}");
  if (!(grad_clip > 0.0)) throw ConfigError("train config: grad_clip must be positive");
  if (!(init_scale > 0.0)) throw ConfigError("train config: init_scale must be positive");
  if (max_caption_len < 2) throw ConfigError("train config: max_caption_len must be at least 2");
  if (dims.hidden == 0 || dims.embed == 0 || dims.attention == 0) {
    throw ConfigError("train config: hidden_dim, embed_dim and attention_dim must be positive");
  }
}

DecoderOptions TrainConfig::decoder_options() const {
  DecoderOptions opts;
  opts.mode = fusion;
  opts.flags = VariantFlags::variant(variant);
  opts.attribute_only_fallback = attribute_only_fallback;
  return opts;
}

std::string TrainConfig::to_json() const {
  json j;
  j["epochs"] = epochs;
  j["learning_rate"] = learning_rate;
  j["batch_size"] = batch_size;
  j["seed"] = seed;
  j["fusion"] = to_string(fusion);
  j["variant"] = variant;
  j["feature_dim"] = dims.feature;
  j["hidden_dim"] = dims.hidden;
  j["embed_dim"] = dims.embed;
  j["attention_dim"] = dims.attention;
  j["vocab_size"] = dims.vocab;
  j["grad_clip"] = grad_clip;
  j["init_scale"] = init_scale;
  j["attribute_only_fallback"] = attribute_only_fallback;
  j["max_caption_len"] = max_caption_len;
  return j.dump();
}

namespace {

template <typename T>
T field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("train config: bad value for '") + key + "': " + e.what());
  }
}

std::size_t positive_size(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(std::string("train config: '") + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

}  // namespace

void TrainConfig::merge_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("train config: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "epochs") epochs = positive_size(j, "epochs");
    else if (key == "learning_rate") learning_rate = field<double>(j, "learning_rate");
    else if (key == "batch_size") batch_size = positive_size(j, "batch_size");
    else if (key == "seed") seed = field<std::uint64_t>(j, "seed");
    else if (key == "fusion") fusion = fusion_from_string(field<std::string>(j, "fusion"));
    else if (key == "variant") variant = field<int>(j, "variant");
    else if (key == "feature_dim") dims.feature = positive_size(j, "feature_dim");
    else if (key == "hidden_dim") dims.hidden = positive_size(j, "hidden_dim");
    else if (key == "embed_dim") dims.embed = positive_size(j, "embed_dim");
    else if (key == "attention_dim") dims.attention = positive_size(j, "attention_dim");
    else if (key == "vocab_size") dims.vocab = positive_size(j, "vocab_size");
    else if (key == "grad_clip") grad_clip = field<double>(j, "grad_clip");
    else if (key == "init_scale") init_scale = field<double>(j, "init_scale");
    else if (key == "attribute_only_fallback") attribute_only_fallback = field<bool>(j, "attribute_only_fallback");
    else if (key == "max_caption_len") max_caption_len = positive_size(j, "max_caption_len");
    else throw ConfigError("train config: unknown key '" + key + "'");
  }
}

TrainConfig TrainConfig::from_json(const std::string& text) {
  TrainConfig cfg;
  cfg.merge_json(text);
  return cfg;
}

void adam_update(ModelParams& params, std::span<const Tensor> grads, AdamState& state, double learning_rate,
                 const AdamOptions& options) {
  auto tensors = params.tensors();
  if (grads.size() != tensors.size()) throw DimensionError("adam_update: gradient count mismatch");
  if (state.m.empty()) {
    for (const auto& t : tensors) {
      state.m.emplace_back(t.shape());
      state.v.emplace_back(t.shape());
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(options.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(options.beta2, static_cast<double>(state.step));
  for (std::size_t p = 0; p < tensors.size(); ++p) {
    auto& w = tensors[p];
    auto& m = state.m[p];
    auto& v = state.v[p];
    const auto& g = grads[p];
    if (g.shape() != w.shape()) throw DimensionError("adam_update: gradient shape mismatch");
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = options.beta1 * m[i] + (1.0 - options.beta1) * g[i];
      v[i] = options.beta2 * v[i] + (1.0 - options.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      w[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + options.eps);
    }
  }
}

double global_norm(std::span<const Tensor> grads) {
  double total = 0.0;
  for (const auto& g : grads)
    for (double x : g.data()) total += x * x;
  return std::sqrt(total);
}

double clip_gradients(std::span<Tensor> grads, double threshold) {
  const double norm = global_norm(grads);
  if (norm > threshold) {
    const double factor = threshold / norm;
    for (auto& g : grads)
      for (auto& x : g.data()) x *= factor;
  }
  return norm;
}

namespace {

void check_alignment(std::size_t steps, std::span<const TokenId> target) {
  if (target.size() < 2 || steps != target.size() - 1) {
    throw AlignmentError("sequence_loss: " + std::to_string(steps) + " steps for a target of " +
                         std::to_string(target.size()) + " ids (need target length - 1)");
  }
}

}  // namespace

Var sequence_loss(std::span<const Var> logits, std::span<const TokenId> target) {
  check_alignment(logits.size(), target);
  std::optional<Var> total;
  std::size_t counted = 0;
  for (std::size_t t = 0; t < logits.size(); ++t) {
    const TokenId y = target[t + 1];
    if (y == kPad) continue;
    Var nll = neg_log_softmax(logits[t], y);
    total = total ? add(*total, nll) : nll;
    ++counted;
  }
  if (!total) throw AlignmentError("sequence_loss: every target position is <pad>");
  return scale(*total, 1.0 / static_cast<double>(counted));
}

double sequence_loss(std::span<const Tensor> logits, std::span<const TokenId> target) {
  Tape tape;
  std::vector<Var> vars;
  for (const auto& l : logits) vars.push_back(tape.constant(l));
  return sequence_loss(vars, target).value()[0];
}

double example_loss_and_gradients(const ModelParams& params, const Example& example, const DecoderOptions& options,
                                  std::vector<Tensor>* grads) {
  Tape tape;
  auto vars = bind_parameters(tape, params, grads != nullptr);
  DecoderGraph graph(tape, vars, params.dims(), example.features, options);
  auto logits = teacher_forced_logits(graph, example.target());
  Var loss = sequence_loss(logits, example.target().ids);
  if (grads) {
    tape.backward(loss);
    grads->clear();
    for (const auto& v : vars) grads->push_back(v.grad());
  }
  return loss.value()[0];
}

TrainState initial_train_state(const Dataset& dataset, const TrainConfig& config) {
  if (dataset.examples.empty()) throw InputError("train: dataset is empty");
  TrainState state;
  state.config = config;
  state.config.dims.feature = dataset.feature_dim();
  state.config.dims.vocab = dataset.vocab.size();
  state.config.validate();
  state.params = ModelParams::init_uniform(state.config.dims, config.seed, config.init_scale);
  state.rng.seed(config.seed ^ 0x9e3779b97f4a7c15ULL);
  return state;
}

void train(const Dataset& dataset, TrainState& state, const EpochCallback& on_epoch) {
  if (dataset.examples.empty()) throw InputError("train: dataset is empty");
  const TrainConfig& cfg = state.config;
  cfg.validate();
  if (dataset.feature_dim() != cfg.dims.feature || dataset.vocab.size() != cfg.dims.vocab) {
    throw CompatibilityError("train: dataset dims (D=" + std::to_string(dataset.feature_dim()) + ", |V|=" +
                             std::to_string(dataset.vocab.size()) + ") do not match the model (D=" +
                             std::to_string(cfg.dims.feature) + ", |V|=" + std::to_string(cfg.dims.vocab) + ")");
  }
  const DecoderOptions options = cfg.decoder_options();
  const std::size_t n = dataset.examples.size();

  std::vector<std::size_t> order(n);
  std::vector<double> losses(n);
  std::vector<Tensor> grads;
  std::vector<Tensor> batch_grads;

  while (state.epoch < cfg.epochs) {
    TrainState last_good = state;
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = n; i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(state.rng)]);
    }

    try {
      for (std::size_t start = 0; start < n; start += cfg.batch_size) {
        const std::size_t end = std::min(n, start + cfg.batch_size);
        batch_grads.clear();
        for (std::size_t b = start; b < end; ++b) {
          const std::size_t idx = order[b];
          losses[idx] = example_loss_and_gradients(state.params, dataset.examples[idx], options, &grads);
          if (!std::isfinite(losses[idx])) throw NumericError("non-finite loss on " + dataset.examples[idx].name);
          if (batch_grads.empty()) {
            batch_grads = grads;
          } else {
            for (std::size_t p = 0; p < grads.size(); ++p) batch_grads[p] = add(batch_grads[p], grads[p]);
          }
        }
        const double inv = 1.0 / static_cast<double>(end - start);
        for (auto& g : batch_grads) g = scale(g, inv);
        const double norm = clip_gradients(batch_grads, cfg.grad_clip);
        if (!std::isfinite(norm)) throw NumericError("non-finite gradient norm");
        adam_update(state.params, batch_grads, state.adam, cfg.learning_rate);
      }
    } catch (const NumericError& e) {
      throw DivergenceError("training diverged in epoch " + std::to_string(state.epoch + 1) + ": " + e.what(),
                            std::move(last_good));
    }

    double total = 0.0;
    for (double l : losses) total += l;
    state.loss_trace.push_back(total / static_cast<double>(n));
    ++state.epoch;
    if (on_epoch) on_epoch(state);
  }
}

TrainState train(const Dataset& dataset, const TrainConfig& config, const EpochCallback& on_epoch) {
  TrainState state = initial_train_state(dataset, config);
  train(dataset, state, on_epoch);
  return state;
}

std::vector<TokenSequence> decode_dataset(const Dataset& dataset, const ModelParams& params,
                                          const DecoderOptions& options, std::size_t max_len) {
  std::vector<TokenSequence> out;
  out.reserve(dataset.examples.size());
  for (const auto& ex : dataset.examples) out.push_back(generate_caption(ex.features, options, params, max_len));
  return out;
}

}  // namespace aitpr
