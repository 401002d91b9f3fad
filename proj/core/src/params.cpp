#include "aitpr/params.hpp"

#include <random>

#include "aitpr/errors.hpp"

namespace aitpr {

namespace {

constexpr std::array<std::string_view, kParamCount> kNames = {
    "W_h0",   "W_c0",   "W_h",    "W_a",    "W_e",  "W_x",  "W_S",  "W_s11", "W_s12", "W_s21",
    "W_s22",  "W_w1",   "W_w2",   "b_1",    "b_2",  "b_3",  "W_hm_q", "W_hn_q", "W_hm_p", "W_hn_p",
    "W_pi",   "W_pf",   "W_po",   "W_pg",   "W_qi", "W_qf", "W_qo", "W_qg",  "W_Ti",  "W_Tf",
    "W_To",   "W_Tg",   "b_i",    "b_f",    "b_o",  "b_g",  "W_hx",
};

}  // namespace

void ModelDims::validate() const {
  if (feature == 0 || hidden == 0 || embed == 0 || attention == 0) {
    throw ConfigError("model dims must all be positive");
  }
  if (vocab <= 4) throw ConfigError("vocabulary must hold at least one word beyond the 4 reserved ids");
}

std::string_view param_name(Param p) { return kNames.at(static_cast<std::size_t>(p)); }

std::optional<Param> param_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kParamCount; ++i) {
    if (kNames[i] == name) return static_cast<Param>(i);
  }
  return std::nullopt;
}

Shape param_shape(Param p, const ModelDims& dims) {
  const auto D = dims.feature, d = dims.hidden, e = dims.embed, a = dims.attention, V = dims.vocab;
  switch (p) {
    case Param::Wh0: case Param::Wc0: case Param::Wx: case Param::WS:
      return {D, d};
    case Param::Wh: return {d, a};
    case Param::Wa: return {a, D};
    case Param::We: return {V, e};
    case Param::Ws11: case Param::Ws12: case Param::Ws21: case Param::Ws22:
    case Param::WTi: case Param::WTf: case Param::WTo: case Param::WTg:
      return {d, d};
    case Param::Ww1: case Param::Ww2:
    case Param::Wpi: case Param::Wpf: case Param::Wpo: case Param::Wpg:
      return {e, d};
    case Param::b1: case Param::b2: case Param::b3:
    case Param::bi: case Param::bf: case Param::bo: case Param::bg:
      return {d};
    case Param::Whm_q: return {d, D};
    case Param::Whn_q: return {D, D};
    case Param::Whm_p: return {d, e};
    case Param::Whn_p: return {e, e};
    case Param::Wqi: case Param::Wqf: case Param::Wqo: case Param::Wqg:
      return {D, d};
    case Param::Whx: return {d, V};
    case Param::Count: break;
  }
  throw ConfigError("unknown parameter");
}

std::size_t param_count(const ModelDims& dims) {
  std::size_t total = 0;
  for (std::size_t i = 0; i < kParamCount; ++i) total += shape_numel(param_shape(static_cast<Param>(i), dims));
  return total;
}

ModelParams::ModelParams(const ModelDims& dims) : dims_(dims) {
  dims.validate();
  for (std::size_t i = 0; i < kParamCount; ++i) tensors_[i] = Tensor(param_shape(static_cast<Param>(i), dims));
}

ModelParams ModelParams::init_uniform(const ModelDims& dims, std::uint64_t seed, double scale) {
  ModelParams params(dims);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (auto& t : params.tensors_)
    for (auto& v : t.data()) v = dist(rng);
  return params;
}

std::size_t ModelParams::total_size() const {
  std::size_t total = 0;
  for (const auto& t : tensors_) total += t.size();
  return total;
}

void ModelParams::set(Param p, Tensor value) {
  const auto expected = param_shape(p, dims_);
  if (value.shape() != expected) {
    throw DimensionError(std::string(param_name(p)) + ": expected shape " + shape_to_string(expected) + ", got " +
                         shape_to_string(value.shape()));
  }
  (*this)[p] = std::move(value);
}

void ModelParams::validate() const {
  dims_.validate();
  for (std::size_t i = 0; i < kParamCount; ++i) {
    const auto p = static_cast<Param>(i);
    const auto expected = param_shape(p, dims_);
    if (tensors_[i].shape() != expected) {
      throw DimensionError(std::string(param_name(p)) + ": expected shape " + shape_to_string(expected) + ", got " +
                           shape_to_string(tensors_[i].shape()));
    }
    if (!tensors_[i].all_finite()) throw NumericError(std::string(param_name(p)) + " holds non-finite values");
  }
}

}  // namespace aitpr
