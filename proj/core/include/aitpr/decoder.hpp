#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aitpr/params.hpp"
#include "aitpr/scene.hpp"
#include "aitpr/tape.hpp"
#include "aitpr/vocabulary.hpp"

namespace aitpr {

// Early: separate softmaxes over attribute and interaction scores, averaged.
// Late: one softmax over all k1 + k2 scores.
enum class FusionMode { Early, Late };

std::string to_string(FusionMode mode);
FusionMode fusion_from_string(const std::string& text);

// Which inputs get semantic correction (S-gated rescaling).
struct VariantFlags {
  bool correct_q = false;  // rescale q_t (attended visual context)
  bool correct_p = false;  // rescale p_t (previous word embedding)

  // 1: none, 2: both, 3: q_t only.
  static VariantFlags variant(int number);
  int variant_number() const;
  friend bool operator==(const VariantFlags&, const VariantFlags&) = default;
};

struct DecoderOptions {
  FusionMode mode = FusionMode::Late;
  VariantFlags flags{};
  // Early fusion with no interaction vectors: attend over attributes alone
  // instead of raising DegenerateBranchError.
  bool attribute_only_fallback = false;
};

// Recurrent state on a tape. embed_sum is the sum of embeddings of every token
// consumed by earlier steps; it is zero at t = 0.
struct DecoderState {
  Var h;
  Var c;
  Var embed_sum;
  std::size_t t = 0;
};

struct Attention {
  Var alpha;                        // Late: over k1 + k2; Early: over k1
  std::optional<Var> alpha_prime;   // Early only: over k2
  Var v_hat;                        // [D]
};

struct StepOutput {
  Var logits;  // [|V|]
  DecoderState state;
};

// Values of every intermediate at one step, for ablation comparisons.
struct StepTrace {
  TokenId consumed = kPad;
  Tensor alpha;
  Tensor alpha_prime;
  Tensor v_hat;
  Tensor q_raw, q;
  Tensor p_raw, p;
  Tensor tpr_gate;
  Tensor h, c;
  Tensor logits;
};

// Creates one tape leaf per parameter, in Param order.
std::vector<Var> bind_parameters(Tape& tape, const ModelParams& params, bool trainable = true);

// (W_hm^T S) * (W_hn^T x)
Var semantic_correct(Var x, Var semantic, Var w_hm, Var w_hn);

// The decoder for one image, bound to a tape. Every step reuses the same gate
// block; fusion mode and variant flags only change how p_t, q_t and v_hat are built.
class DecoderGraph {
 public:
  DecoderGraph(Tape& tape, std::span<const Var> params, const ModelDims& dims, const RegionFeatureSet& features,
               const DecoderOptions& options);

  Var param(Param p) const { return params_[static_cast<std::size_t>(p)]; }
  const DecoderOptions& options() const { return options_; }
  const ModelDims& dims() const { return dims_; }
  Tape& tape() const { return *tape_; }

  // h0 = W_h0^T v_bar, c0 = W_c0^T v_bar, embed_sum = 0, t = 0.
  DecoderState init_state() const;
  Attention attend(Var h_prev) const;
  // S = tanh(W_S^T mean(v, v')). Fixed per image.
  Var semantic_vector() const { return semantic_; }
  // v_x = W_x^T mean(v, v').
  Var v_x() const { return v_x_; }
  Var correct_q(Var q) const;
  Var correct_p(Var p) const;
  Var tpr_gate(const DecoderState& state) const;
  // LSTM update from the three inputs; `consumed` is the token whose embedding
  // is p, and it is added to embed_sum.
  StepOutput cell_step(Var p, Var q, Var tpr, const DecoderState& state, TokenId consumed) const;

  // Full step: p = W_e[prev], q = v_hat, corrections per flags, gate, cell.
  StepOutput step(const DecoderState& state, TokenId prev, StepTrace* trace = nullptr) const;

 private:
  Tape* tape_;
  std::vector<Var> params_;
  ModelDims dims_;
  DecoderOptions options_;
  Var attributes_;
  std::optional<Var> interactions_;
  Var all_rows_;
  Var v_bar_;
  Var v_x_;
  Var semantic_;
  std::size_t k1_;
  std::size_t k2_;
};

// Greedy choice over logits. Ties go to the lowest id; ids in `banned` are skipped.
TokenId argmax_token(const Tensor& logits, std::span<const TokenId> banned = {});

// Logits for every target position under teacher forcing (prev = target[t-1]).
std::vector<Var> teacher_forced_logits(const DecoderGraph& graph, const TokenSequence& target,
                                       std::vector<StepTrace>* trace = nullptr);

// Greedy rollout from <bos>; stops at <eos> or when the caption reaches
// max_len ids (an <eos> is then appended in the last slot). <pad> and <bos> are
// never emitted.
TokenSequence generate_caption(const RegionFeatureSet& features, const DecoderOptions& options,
                               const ModelParams& params, std::size_t max_len,
                               std::vector<StepTrace>* trace = nullptr);

}  // namespace aitpr
