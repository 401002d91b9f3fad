// Runs every acceptance criterion and prints one PASS/FAIL line for each.
// Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "aitpr/decoder.hpp"
#include "aitpr/features_io.hpp"
#include "aitpr/metrics.hpp"
#include "aitpr/tpr.hpp"
#include "aitpr/training.hpp"
#include "cli/commands.hpp"
#include "metric_corpora.hpp"
#include "support.hpp"

namespace aitpr {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome tpr_round_trip() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dm = 1 + rng() % 64;
    const std::size_t n = 1 + rng() % std::min<std::size_t>(dm, 32);
    const std::size_t dn = 1 + rng() % 64;
    const RoleSet roles = generate_roles(n, dm, rng());
    const FillerSet fillers{test::random_tensor({n, dn}, rng)};
    const BoundRepresentation s = bind(fillers, roles);
    for (std::size_t j = 0; j < n; ++j) {
      worst = std::max(worst, max_abs_diff(unbind(s, roles.role(j)), fillers.fillers.row(j)));
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-8 && secs < 5.0, "max error " + fmt("%.2e", worst) + ", " + fmt("%.2f", secs) + " s"};
}

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  std::ostringstream out, err;
  const int code = cli::run({"aitpr", "gradcheck", "--dims", "D=16,d=6,e=5,V=12", "--eps", "1e-5", "--seed", "0"}, out, err);
  const double secs = seconds_since(t0);
  const std::string text = out.str();
  std::size_t passes = 0;
  for (std::size_t pos = 0; (pos = text.find("PASS  fusion=", pos)) != std::string::npos; ++pos) ++passes;
  double worst = 0.0;
  for (std::size_t pos = 0; (pos = text.find("max_rel_error=", pos)) != std::string::npos; ++pos) {
    worst = std::max(worst, std::strtod(text.c_str() + pos + 14, nullptr));
  }
  return {code == 0 && passes == 6 && secs < 60.0,
          std::to_string(passes) + "/6 combinations, worst " + fmt("%.2e", worst) + ", " + fmt("%.1f", secs) + " s"};
}

Outcome attention_normalization() {
  std::mt19937_64 rng(77);
  double worst = 0.0;
  int calls = 0;
  for (FusionMode mode : {FusionMode::Early, FusionMode::Late}) {
    for (int i = 0; i < 1000; ++i) {
      const ModelDims dims{4 + rng() % 13, 2 + rng() % 9, 2 + rng() % 5, 2 + rng() % 7, 6 + rng() % 6};
      const ModelParams params = ModelParams::init_uniform(dims, rng(), 1.0);
      const RegionFeatureSet features(test::random_tensor({1 + rng() % 6, dims.feature}, rng, 2.0),
                                      test::random_tensor({1 + rng() % 5, dims.feature}, rng, 2.0));
      DecoderOptions opts;
      opts.mode = mode;
      Tape tape;
      DecoderGraph g(tape, bind_parameters(tape, params, false), dims, features, opts);
      const Attention a = g.attend(tape.constant(test::random_tensor({dims.hidden}, rng, 3.0)));
      worst = std::max(worst, std::abs(sum(a.alpha.value()) - 1.0));
      if (a.alpha_prime) worst = std::max(worst, std::abs(sum(a.alpha_prime->value()) - 1.0));
      ++calls;
    }
  }
  return {worst <= 1e-12, std::to_string(calls) + " attend calls, max |sum(alpha) - 1| = " + fmt("%.1e", worst)};
}

bool same(const StepTrace& a, const StepTrace& b) {
  return a.consumed == b.consumed && a.alpha == b.alpha && a.alpha_prime == b.alpha_prime && a.v_hat == b.v_hat &&
         a.q_raw == b.q_raw && a.q == b.q && a.p_raw == b.p_raw && a.p == b.p && a.tpr_gate == b.tpr_gate &&
         a.h == b.h && a.c == b.c && a.logits == b.logits;
}

Outcome structural_ablation() {
  const ModelDims dims{16, 8, 6, 8, 12};
  const ModelParams params = ModelParams::init_uniform(dims, 4242, 0.5);
  std::mt19937_64 rng(4242);
  const RegionFeatureSet features(test::random_tensor({3, dims.feature}, rng), test::random_tensor({2, dims.feature}, rng));
  const std::vector<TokenId> tokens{kBos, 4, 9, 6, 11, 5};
  bool v1_ok = true, v23_ok = true;
  std::size_t steps = 0;

  for (FusionMode mode : {FusionMode::Early, FusionMode::Late}) {
    Tape tape;
    const auto vars = bind_parameters(tape, params);
    DecoderOptions o1{mode, VariantFlags::variant(1), false};
    DecoderOptions o2{mode, VariantFlags::variant(2), false};
    DecoderOptions o3{mode, VariantFlags::variant(3), false};
    DecoderGraph g1(tape, vars, dims, features, o1), g2(tape, vars, dims, features, o2), g3(tape, vars, dims, features, o3);

    // variant(1) against the pipeline with the correction calls skipped
    DecoderState s1 = g1.init_state(), bypass = g1.init_state();
    for (TokenId tok : tokens) {
      StepTrace t1, tb;
      s1 = g1.step(s1, tok, &t1).state;
      Var p = row(g1.param(Param::We), tok);
      Attention a = g1.attend(bypass.h);
      Var gate = g1.tpr_gate(bypass);
      StepOutput out = g1.cell_step(p, a.v_hat, gate, bypass, tok);
      tb.consumed = tok;
      tb.alpha = a.alpha.value();
      tb.alpha_prime = a.alpha_prime ? a.alpha_prime->value() : Tensor();
      tb.v_hat = tb.q_raw = tb.q = a.v_hat.value();
      tb.p_raw = tb.p = p.value();
      tb.tpr_gate = gate.value();
      tb.h = out.state.h.value();
      tb.c = out.state.c.value();
      tb.logits = out.logits.value();
      bypass = out.state;
      v1_ok = v1_ok && same(t1, tb);
    }

    // variant(2) and variant(3) from a shared state sequence
    DecoderState s = g3.init_state();
    for (TokenId tok : tokens) {
      StepTrace t2, t3;
      g2.step(s, tok, &t2);
      const StepOutput next = g3.step(s, tok, &t3);
      const bool upstream_equal = t2.alpha == t3.alpha && t2.alpha_prime == t3.alpha_prime && t2.v_hat == t3.v_hat &&
                                  t2.q_raw == t3.q_raw && t2.q == t3.q && t2.p_raw == t3.p_raw &&
                                  t2.tpr_gate == t3.tpr_gate;
      const bool p_path_differs = t2.p != t3.p && t3.p == t3.p_raw &&
                                  t2.p == g2.correct_p(tape.constant(t2.p_raw)).value();
      v23_ok = v23_ok && upstream_equal && p_path_differs;
      s = next.state;
      ++steps;
    }
  }
  return {v1_ok && v23_ok, std::string("variant(1) == bypassed pipeline: ") + (v1_ok ? "bit-identical" : "MISMATCH") +
                               "; variant(2) vs variant(3): " + (v23_ok ? "differ only in p_t" : "UNEXPECTED DIFFERENCE") +
                               " (" + std::to_string(steps) + " steps, both fusion modes)"};
}

std::vector<Tokens> to_tokens(const std::vector<TokenSequence>& seqs, const Vocabulary& vocab) {
  std::vector<Tokens> out;
  for (const auto& s : seqs) out.push_back(split_tokens(detokenize(s, vocab)));
  return out;
}

std::vector<ReferenceSet> references_of(const Dataset& d) {
  std::vector<ReferenceSet> out;
  for (const auto& ex : d.examples) {
    ReferenceSet r;
    for (const auto& ref : ex.references) r.push_back(split_tokens(detokenize(ref, d.vocab)));
    out.push_back(std::move(r));
  }
  return out;
}

Outcome overfit() {
  const auto t0 = Clock::now();
  SynthConfig sc;
  sc.scenes = 50;
  sc.seed = 7;
  sc.feature_dim = 64;
  const Dataset data = synthesize_dataset(sc);

  TrainConfig cfg;
  cfg.fusion = FusionMode::Late;
  cfg.variant = 3;
  cfg.dims.hidden = 64;
  cfg.epochs = 60;
  cfg.learning_rate = 3e-3;
  cfg.seed = 0;
  const TrainState state = train(data, cfg);
  const auto decoded = decode_dataset(data, state.params, cfg.decoder_options(), cfg.max_caption_len);
  std::size_t exact = 0;
  for (std::size_t i = 0; i < decoded.size(); ++i) exact += decoded[i] == data.examples[i].target();
  const double b4 = bleu(to_tokens(decoded, data.vocab), references_of(data), 4);
  const double secs = seconds_since(t0);
  const double loss = state.loss_trace.back();
  const double frac = static_cast<double>(exact) / static_cast<double>(decoded.size());
  return {loss < 0.05 && frac >= 0.9 && b4 >= 0.95 && secs < 300.0,
          "final loss " + fmt("%.2e", loss) + ", exact " + std::to_string(exact) + "/50, BLEU-4 " + fmt("%.4f", b4) +
              ", " + fmt("%.1f", secs) + " s"};
}

Outcome metric_oracles() {
  double worst = 0.0;
  for (const auto& c : {test::corpus_a(), test::corpus_b(), test::corpus_c()}) {
    for (int n = 1; n <= 4; ++n) worst = std::max(worst, std::abs(bleu(c.candidates, c.references, n) - c.bleu[n - 1]));
    worst = std::max(worst, std::abs(evaluate_corpus(c.candidates, c.references).rouge_l - c.rouge_l));
    const CiderResult cd = cider_d(c.candidates, c.references);
    worst = std::max(worst, std::abs(cd.score - c.cider));
    for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(cd.per_image[i] - c.cider_per_image[i]));
  }
  const test::Corpus a = test::corpus_a();
  std::vector<ReferenceSet> self;
  for (const auto& cand : a.candidates) self.push_back({cand});
  const EvalReport r = evaluate_corpus(a.candidates, self);
  const bool identity = r.bleu[3] == 1.0 && r.rouge_l == 1.0;
  return {worst <= 1e-6 && identity, "max deviation " + fmt("%.1e", worst) + "; identical corpora BLEU-4 " +
                                         fmt("%.4f", r.bleu[3]) + ", ROUGE-L " + fmt("%.4f", r.rouge_l)};
}

Outcome determinism() {
  test::TempDir dir("aitpr_accept");
  setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  std::ostringstream sink;
  auto run = [&](std::vector<std::string> args) {
    args.insert(args.begin(), "aitpr");
    return cli::run(args, sink, sink);
  };
  const std::string data = (dir / "data").string();
  int code = run({"synth", "--scenes", "10", "--seed", "3", "--out", data});
  for (const char* tag : {"a", "b"}) {
    const std::string base = (dir / tag).string();
    code |= run({"train", "--data", data, "--out", base + "/model.ckpt", "--epochs", "15", "--lr", "3e-3", "--seed",
                 "11", "--quiet"});
    code |= run({"eval", "--ckpt", base + "/model.ckpt", "--data", data, "--report", base + "/report.json"});
  }
  unsetenv("SOURCE_DATE_EPOCH");
  if (code != 0) return {false, "a CLI run failed: " + sink.str()};
  const bool ck = read_file(dir / "a" / "model.ckpt") == read_file(dir / "b" / "model.ckpt");
  const bool rep = read_file(dir / "a" / "report.json") == read_file(dir / "b" / "report.json");
  return {ck && rep, std::string("checkpoints ") + (ck ? "byte-identical" : "DIFFER") + ", reports " +
                         (rep ? "byte-identical" : "DIFFER")};
}

Outcome variant_ordering() {
  SynthConfig train_cfg;
  train_cfg.scenes = 40;
  train_cfg.seed = 101;
  SynthConfig test_cfg = train_cfg;
  test_cfg.scenes = 20;
  test_cfg.seed = 202;
  const Dataset train_set = synthesize_dataset(train_cfg);
  const Dataset test_set = synthesize_dataset(test_cfg);
  std::string detail = "held-out CIDEr-D / BLEU-4, late fusion:";
  for (int v = 1; v <= 3; ++v) {
    TrainConfig cfg;
    cfg.variant = v;
    cfg.epochs = 25;
    cfg.learning_rate = 3e-3;
    const TrainState s = train(train_set, cfg);
    const auto decoded = decode_dataset(test_set, s.params, cfg.decoder_options(), cfg.max_caption_len);
    const EvalReport r = evaluate_corpus(to_tokens(decoded, test_set.vocab), references_of(test_set));
    detail += " variant(" + std::to_string(v) + ") " + fmt("%.3f", r.cider_d) + " / " + fmt("%.3f", r.bleu[3]) + ";";
  }
  return {true, detail + " logged only"};
}

}  // namespace
}  // namespace aitpr

int main() {
  using aitpr::Outcome;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"tpr-round-trip", aitpr::tpr_round_trip},
      {"gradient-suite", aitpr::gradient_suite},
      {"attention-normalization", aitpr::attention_normalization},
      {"structural-ablation", aitpr::structural_ablation},
      {"overfit", aitpr::overfit},
      {"metric-oracles", aitpr::metric_oracles},
      {"determinism", aitpr::determinism},
      {"variant-ordering-note", aitpr::variant_ordering},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << "  " << o.detail << std::endl;
  }
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed"))
            << std::endl;
  return failures ? 1 : 0;
}
