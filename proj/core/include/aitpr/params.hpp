#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "aitpr/tensor.hpp"

namespace aitpr {

struct ModelDims {
  std::size_t feature = 64;    // D, region feature width
  std::size_t hidden = 64;     // d, LSTM state width
  std::size_t embed = 32;      // e, word embedding width
  std::size_t attention = 32;  // intermediate transfer width
  std::size_t vocab = 16;      // |V|, including the 4 reserved ids

  void validate() const;
  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

// Every learnable tensor of the decoder. Weights are stored [in x out] and
// applied as x^T W; W_e is a lookup table [vocab x embed].
enum class Param : std::size_t {
  Wh0, Wc0,                       // initial state maps  [D x d]
  Wh, Wa,                         // attention           [d x att], [att x D]
  We,                             // word embedding      [V x e]
  Wx,                             // v_x projection      [D x d]
  WS,                             // semantic summary    [D x d]
  Ws11, Ws12, Ws21, Ws22,         // tensor gate         [d x d]
  Ww1, Ww2,                       // embedding-sum maps  [e x d]
  b1, b2, b3,                     //                     [d]
  Whm_q, Whn_q,                   // q-path correction   [d x D], [D x D]
  Whm_p, Whn_p,                   // p-path correction   [d x e], [e x e]
  Wpi, Wpf, Wpo, Wpg,             // gates from p        [e x d]
  Wqi, Wqf, Wqo, Wqg,             // gates from q        [D x d]
  WTi, WTf, WTo, WTg,             // gates from T        [d x d]
  bi, bf, bo, bg,                 //                     [d]
  Whx,                            // output              [d x V]
  Count
};

inline constexpr std::size_t kParamCount = static_cast<std::size_t>(Param::Count);

std::string_view param_name(Param p);
std::optional<Param> param_from_name(std::string_view name);
Shape param_shape(Param p, const ModelDims& dims);

class ModelParams {
 public:
  ModelParams() = default;
  explicit ModelParams(const ModelDims& dims);  // all zeros

  // Uniform in [-scale, scale], deterministic in seed.
  static ModelParams init_uniform(const ModelDims& dims, std::uint64_t seed, double scale = 0.08);

  const ModelDims& dims() const { return dims_; }
  Tensor& operator[](Param p) { return tensors_[static_cast<std::size_t>(p)]; }
  const Tensor& operator[](Param p) const { return tensors_[static_cast<std::size_t>(p)]; }
  std::span<Tensor> tensors() { return tensors_; }
  std::span<const Tensor> tensors() const { return tensors_; }
  std::size_t total_size() const;

  // Replaces one tensor; throws DimensionError if the shape differs from the declared one.
  void set(Param p, Tensor value);
  // Checks every shape against dims() and that all values are finite.
  void validate() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  ModelDims dims_;
  std::array<Tensor, kParamCount> tensors_;
};

// Number of scalar parameters the decoder would have at `dims`.
std::size_t param_count(const ModelDims& dims);

}  // namespace aitpr
