#include "aitpr/decoder.hpp"

#include <algorithm>

#include "aitpr/errors.hpp"
#include "aitpr/tpr.hpp"

namespace aitpr {

std::string to_string(FusionMode mode) { return mode == FusionMode::Early ? "early" : "late"; }

FusionMode fusion_from_string(const std::string& text) {
  if (text == "early") return FusionMode::Early;
  if (text == "late") return FusionMode::Late;
  throw ConfigError("unknown fusion mode '" + text + "', expected early or late");
}

VariantFlags VariantFlags::variant(int number) {
  switch (number) {
    case 1: return {false, false};
    case 2: return {true, true};
    case 3: return {true, false};
    default: throw ConfigError("variant must be one of {1,2,3}, got " + std::to_string(number));
  }
}

int VariantFlags::variant_number() const {
  if (!correct_q && !correct_p) return 1;
  if (correct_q && correct_p) return 2;
  if (correct_q) return 3;
  return 0;  // p-only correction has no numbered variant
}

std::vector<Var> bind_parameters(Tape& tape, const ModelParams& params, bool trainable) {
  std::vector<Var> vars;
  vars.reserve(kParamCount);
  for (const auto& t : params.tensors()) vars.push_back(trainable ? tape.parameter(t) : tape.constant(t));
  return vars;
}

Var semantic_correct(Var x, Var semantic, Var w_hm, Var w_hn) {
  return mul(vecmat(semantic, w_hm), vecmat(x, w_hn));
}

DecoderGraph::DecoderGraph(Tape& tape, std::span<const Var> params, const ModelDims& dims,
                           const RegionFeatureSet& features, const DecoderOptions& options)
    : tape_(&tape), params_(params.begin(), params.end()), dims_(dims), options_(options) {
  if (params_.size() != kParamCount) {
    throw DimensionError("decoder expects " + std::to_string(kParamCount) + " parameters, got " +
                         std::to_string(params_.size()));
  }
  if (features.attribute_count() == 0) throw InputError("decoder: region features are empty");
  if (features.dim() != dims.feature) {
    throw DimensionError("decoder: feature dim " + std::to_string(features.dim()) + " does not match model dim " +
                         std::to_string(dims.feature));
  }
  for (std::size_t i = 0; i < kParamCount; ++i) {
    const auto expected = param_shape(static_cast<Param>(i), dims);
    if (params_[i].shape() != expected) {
      throw DimensionError(std::string(param_name(static_cast<Param>(i))) + ": expected " + shape_to_string(expected) +
                           ", got " + shape_to_string(params_[i].shape()));
    }
  }
  k1_ = features.attribute_count();
  k2_ = features.interaction_count();
  if (options.mode == FusionMode::Early && k2_ == 0 && !options.attribute_only_fallback) {
    throw DegenerateBranchError("early fusion needs at least one interaction vector (k2 = 0)");
  }
  attributes_ = tape.constant(features.v());
  if (k2_ > 0) interactions_ = tape.constant(features.v_prime());
  all_rows_ = tape.constant(features.all_rows());
  v_bar_ = tape.constant(features.v_bar());
  Var pooled = tape.constant(features.pooled_mean());
  v_x_ = vecmat(pooled, param(Param::Wx));
  semantic_ = tanh(vecmat(pooled, param(Param::WS)));
}

DecoderState DecoderGraph::init_state() const {
  DecoderState s;
  s.h = vecmat(v_bar_, param(Param::Wh0));
  s.c = vecmat(v_bar_, param(Param::Wc0));
  s.embed_sum = tape_->constant(Tensor({dims_.embed}));
  s.t = 0;
  return s;
}

Attention DecoderGraph::attend(Var h_prev) const {
  // Query in feature space; scores are its inner products with each region row.
  Var query = vecmat(tanh(vecmat(h_prev, param(Param::Wh))), param(Param::Wa));
  Attention out;
  if (options_.mode == FusionMode::Late) {
    out.alpha = softmax(matvec(all_rows_, query));
    out.v_hat = vecmat(out.alpha, all_rows_);
    return out;
  }
  out.alpha = softmax(matvec(attributes_, query));
  Var attribute_context = vecmat(out.alpha, attributes_);
  if (!interactions_) {
    if (!options_.attribute_only_fallback) {
      throw DegenerateBranchError("early fusion needs at least one interaction vector (k2 = 0)");
    }
    out.v_hat = attribute_context;
    return out;
  }
  out.alpha_prime = softmax(matvec(*interactions_, query));
  Var interaction_context = vecmat(*out.alpha_prime, *interactions_);
  out.v_hat = scale(add(attribute_context, interaction_context), 0.5);
  return out;
}

Var DecoderGraph::correct_q(Var q) const {
  return semantic_correct(q, semantic_, param(Param::Whm_q), param(Param::Whn_q));
}

Var DecoderGraph::correct_p(Var p) const {
  return semantic_correct(p, semantic_, param(Param::Whm_p), param(Param::Whn_p));
}

Var DecoderGraph::tpr_gate(const DecoderState& state) const {
  Var structure = sigmoid(vecmat(state.h, param(Param::Ws11)) + vecmat(state.embed_sum, param(Param::Ww1)) +
                          param(Param::b1));
  Var first = vecmat(structure, param(Param::Ws12));
  Var selector = sigmoid(vecmat(state.h, param(Param::Ws21)) + vecmat(state.embed_sum, param(Param::Ww2)) +
                         param(Param::b2));
  Var second = tanh(vecmat(mul(v_x_, selector), param(Param::Ws22)) + param(Param::b3));
  return hadamard_bind(first, second);
}

StepOutput DecoderGraph::cell_step(Var p, Var q, Var tpr, const DecoderState& state, TokenId consumed) const {
  if (consumed >= dims_.vocab) throw InputError("cell_step: token id " + std::to_string(consumed) + " out of range");
  auto gate = [&](Param wp, Param wq, Param wt, Param b) {
    return vecmat(p, param(wp)) + vecmat(q, param(wq)) + vecmat(tpr, param(wt)) + param(b);
  };
  Var i = sigmoid(gate(Param::Wpi, Param::Wqi, Param::WTi, Param::bi));
  Var f = sigmoid(gate(Param::Wpf, Param::Wqf, Param::WTf, Param::bf));
  Var o = sigmoid(gate(Param::Wpo, Param::Wqo, Param::WTo, Param::bo));
  Var g = tanh(gate(Param::Wpg, Param::Wqg, Param::WTg, Param::bg));

  StepOutput out;
  out.state.c = mul(f, state.c) + mul(i, g);
  out.state.h = mul(o, tanh(out.state.c));
  out.state.embed_sum = state.embed_sum + row(param(Param::We), consumed);
  out.state.t = state.t + 1;
  out.logits = vecmat(out.state.h, param(Param::Whx));
  return out;
}

StepOutput DecoderGraph::step(const DecoderState& state, TokenId prev, StepTrace* trace) const {
  if (prev >= dims_.vocab) throw InputError("decode step: token id " + std::to_string(prev) + " out of range");
  Var p_raw = row(param(Param::We), prev);
  Attention att = attend(state.h);
  Var q_raw = att.v_hat;
  Var q = options_.flags.correct_q ? correct_q(q_raw) : q_raw;
  Var p = options_.flags.correct_p ? correct_p(p_raw) : p_raw;
  Var gate = tpr_gate(state);
  StepOutput out = cell_step(p, q, gate, state, prev);
  if (trace) {
    trace->consumed = prev;
    trace->alpha = att.alpha.value();
    trace->alpha_prime = att.alpha_prime ? att.alpha_prime->value() : Tensor();
    trace->v_hat = att.v_hat.value();
    trace->q_raw = q_raw.value();
    trace->q = q.value();
    trace->p_raw = p_raw.value();
    trace->p = p.value();
    trace->tpr_gate = gate.value();
    trace->h = out.state.h.value();
    trace->c = out.state.c.value();
    trace->logits = out.logits.value();
  }
  return out;
}

TokenId argmax_token(const Tensor& logits, std::span<const TokenId> banned) {
  std::optional<TokenId> best;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const auto id = static_cast<TokenId>(i);
    if (std::find(banned.begin(), banned.end(), id) != banned.end()) continue;
    if (!best || logits[i] > logits[*best]) best = id;
  }
  if (!best) throw InputError("argmax_token: every id is banned");
  return *best;
}

std::vector<Var> teacher_forced_logits(const DecoderGraph& graph, const TokenSequence& target,
                                       std::vector<StepTrace>* trace) {
  if (target.ids.size() < 2) throw AlignmentError("teacher forcing needs at least two target ids");
  std::vector<Var> logits;
  logits.reserve(target.ids.size() - 1);
  DecoderState state = graph.init_state();
  for (std::size_t t = 1; t < target.ids.size(); ++t) {
    StepTrace step_trace;
    StepOutput out = graph.step(state, target.ids[t - 1], trace ? &step_trace : nullptr);
    if (trace) trace->push_back(std::move(step_trace));
    logits.push_back(out.logits);
    state = out.state;
  }
  return logits;
}

TokenSequence generate_caption(const RegionFeatureSet& features, const DecoderOptions& options,
                               const ModelParams& params, std::size_t max_len, std::vector<StepTrace>* trace) {
  if (max_len < 2) throw ConfigError("generate_caption: max_len must be at least 2");
  Tape tape;
  auto vars = bind_parameters(tape, params, false);
  DecoderGraph graph(tape, vars, params.dims(), features, options);

  static constexpr TokenId kNeverEmitted[] = {kPad, kBos};
  TokenSequence seq;
  seq.ids.push_back(kBos);
  DecoderState state = graph.init_state();
  while (true) {
    if (seq.ids.size() + 1 == max_len) {
      seq.ids.push_back(kEos);
      break;
    }
    StepTrace step_trace;
    StepOutput out = graph.step(state, seq.ids.back(), trace ? &step_trace : nullptr);
    if (trace) trace->push_back(std::move(step_trace));
    const TokenId next = argmax_token(out.logits.value(), kNeverEmitted);
    seq.ids.push_back(next);
    if (next == kEos) break;
    state = out.state;
  }
  return seq;
}

}  // namespace aitpr
