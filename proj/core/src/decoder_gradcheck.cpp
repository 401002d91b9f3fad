#include "aitpr/decoder_gradcheck.hpp"

#include <random>

#include "aitpr/errors.hpp"
#include "aitpr/training.hpp"

namespace aitpr {

DecoderGradCheckResult check_decoder_gradients(const ModelDims& dims, const DecoderOptions& options,
                                               std::uint64_t seed, const GradCheckOptions& check) {
  dims.validate();
  const std::size_t count = param_count(dims);
  if (count >= kMaxGradCheckParams) {
    throw ConfigError("gradient check refused: dims give an estimated " + std::to_string(count) +
                      " parameters (limit " + std::to_string(kMaxGradCheckParams) + ")");
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_rows = [&](std::size_t rows) {
    Tensor t({rows, dims.feature});
    for (auto& v : t.data()) v = gauss(rng);
    return t;
  };
  const RegionFeatureSet features(random_rows(3), random_rows(2));

  std::uniform_int_distribution<TokenId> word(kFirstWordId, static_cast<TokenId>(dims.vocab - 1));
  std::vector<TokenId> words;
  for (int i = 0; i < 5; ++i) words.push_back(word(rng));
  const TokenSequence target = TokenSequence::frame(words);

  // Wider than the training init so that every nonlinearity is exercised.
  const ModelParams params = ModelParams::init_uniform(dims, rng(), 0.5);

  ScalarFunction loss = [&](Tape& tape, std::span<const Var> vars) {
    DecoderGraph graph(tape, vars, dims, features, options);
    auto logits = teacher_forced_logits(graph, target);
    return sequence_loss(logits, target.ids);
  };

  const auto report = grad_check(loss, params.tensors(), check);
  DecoderGradCheckResult result;
  for (std::size_t i = 0; i < kParamCount; ++i) {
    result.names.emplace_back(param_name(static_cast<Param>(i)));
    result.errors.push_back(report.per_param[i]);
  }
  result.max_error = report.max_relative_error;
  tape_gradients(loss, params.tensors(), &result.loss);
  return result;
}

}  // namespace aitpr
