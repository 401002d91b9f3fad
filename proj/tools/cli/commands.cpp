#include "cli/commands.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "aitpr/checkpoint.hpp"
#include "aitpr/dataset.hpp"
#include "aitpr/decoder_gradcheck.hpp"
#include "aitpr/errors.hpp"
#include "aitpr/features_io.hpp"
#include "aitpr/metrics.hpp"
#include "aitpr/training.hpp"
#include "cli/manifest.hpp"

namespace aitpr::cli {

namespace fs = std::filesystem;

namespace {

// Usage problems detected after CLI11 parsing.
class UsageError : public Error {
 public:
  using Error::Error;
};

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
      dynamic_cast<const InputError*>(&e)) {
    return kExitUsage;
  }
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const FormatError*>(&e) ||
      dynamic_cast<const CompatibilityError*>(&e) || dynamic_cast<const CoverageError*>(&e)) {
    return kExitIo;
  }
  if (dynamic_cast<const NumericError*>(&e)) return kExitVerificationFailed;
  return kExitIo;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

fs::path parent_or_cwd(const fs::path& p) {
  auto parent = p.parent_path();
  return parent.empty() ? fs::path(".") : parent;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- synth -----------------------------------------------------------------

struct SynthArgs {
  long long scenes = -1;
  unsigned long long seed = 0;
  std::string out;
  std::size_t dim = 64;
  double noise = 0.05;
  std::size_t max_objects = 6;
  unsigned long long world_seed = FeatureSpace::kDefaultWorldSeed;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  if (a.scenes <= 0) throw UsageError("synth: --scenes must be a positive integer");
  RunManifest manifest;
  manifest.command = "synth";
  manifest.started_at = utc_timestamp();
  manifest.seed = a.seed;

  SynthConfig cfg;
  cfg.scenes = static_cast<std::size_t>(a.scenes);
  cfg.seed = a.seed;
  cfg.feature_dim = a.dim;
  cfg.noise_sigma = a.noise;
  cfg.scene.max_objects = a.max_objects;
  cfg.world_seed = a.world_seed;

  const Dataset data = synthesize_dataset(cfg);
  const fs::path dir(a.out);
  ensure_directory(dir);
  save_dataset(dir, data);

  nlohmann::json j;
  j["scenes"] = cfg.scenes;
  j["seed"] = cfg.seed;
  j["feature_dim"] = cfg.feature_dim;
  j["noise_sigma"] = cfg.noise_sigma;
  j["max_objects"] = cfg.scene.max_objects;
  j["world_seed"] = cfg.world_seed;
  manifest.config_json = j.dump();
  manifest.artifacts.push_back("vocab.txt");
  for (const auto& ex : data.examples) {
    manifest.artifacts.push_back(ex.name + ".json");
    manifest.artifacts.push_back(ex.name + ".txt");
  }
  manifest.finished_at = utc_timestamp();
  manifest.write(dir / "manifest.json");
  out << "wrote " << data.examples.size() << " scenes and a " << data.vocab.size() << "-id vocabulary to " << dir.string()
      << "\n";
  return kExitOk;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string out;
  std::string config;
  std::string resume;
  int variant = 3;
  std::string fusion = "late";
  std::size_t epochs = 0;
  double lr = 0;
  std::size_t batch_size = 0;
  unsigned long long seed = 0;
  std::size_t hidden = 0, embed = 0, attention = 0;
  double grad_clip = 0;
  bool quiet = false;
  CLI::Option* variant_opt = nullptr;
  CLI::Option* fusion_opt = nullptr;
  CLI::Option* epochs_opt = nullptr;
  CLI::Option* lr_opt = nullptr;
  CLI::Option* batch_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* hidden_opt = nullptr;
  CLI::Option* embed_opt = nullptr;
  CLI::Option* attention_opt = nullptr;
  CLI::Option* clip_opt = nullptr;
};

void write_loss_csv(const fs::path& path, const std::vector<double>& trace) {
  std::string csv = "epoch,loss\n";
  for (std::size_t i = 0; i < trace.size(); ++i) csv += std::to_string(i + 1) + "," + fmt_double(trace[i]) + "\n";
  write_file_atomically(path, csv);
}

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  RunManifest manifest;
  manifest.command = "train";
  manifest.started_at = utc_timestamp();

  const Dataset data = load_dataset(a.data);
  if (data.examples.empty()) throw UsageError("train: dataset " + a.data + " holds no scenes");

  TrainState state;
  if (!a.resume.empty()) {
    Checkpoint ck = load_checkpoint(a.resume);
    if (!(ck.vocab == data.vocab)) throw CompatibilityError("train: checkpoint vocabulary differs from the dataset's");
    state = std::move(ck.state);
    if (a.epochs_opt->count()) state.config.epochs = a.epochs;
    if (a.lr_opt->count()) state.config.learning_rate = a.lr;
  } else {
    TrainConfig cfg;
    cfg.seed = default_seed();
    if (!a.config.empty()) cfg.merge_json(read_file(a.config));
    if (a.variant_opt->count()) cfg.variant = a.variant;
    if (a.fusion_opt->count()) cfg.fusion = fusion_from_string(a.fusion);
    if (a.epochs_opt->count()) cfg.epochs = a.epochs;
    if (a.lr_opt->count()) cfg.learning_rate = a.lr;
    if (a.batch_opt->count()) cfg.batch_size = a.batch_size;
    if (a.seed_opt->count()) cfg.seed = a.seed;
    if (a.hidden_opt->count()) cfg.dims.hidden = a.hidden;
    if (a.embed_opt->count()) cfg.dims.embed = a.embed;
    if (a.attention_opt->count()) cfg.dims.attention = a.attention;
    if (a.clip_opt->count()) cfg.grad_clip = a.grad_clip;
    state = initial_train_state(data, cfg);
  }
  manifest.seed = state.config.seed;

  const fs::path ckpt(a.out);
  ensure_directory(parent_or_cwd(ckpt));
  fs::path loss_path = parent_or_cwd(ckpt) / (ckpt.stem().string() + ".loss.csv");

  int code = kExitOk;
  try {
    train(data, state, [&](const TrainState& s) {
      if (!a.quiet && (s.epoch % 10 == 0 || s.epoch == s.config.epochs)) {
        err << "epoch " << s.epoch << "/" << s.config.epochs << " loss " << fmt_double(s.loss_trace.back()) << "\n";
      }
    });
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "; writing last good checkpoint\n";
    state = e.last_good();
    code = kExitVerificationFailed;
  }

  save_checkpoint(ckpt, state, data.vocab);
  write_loss_csv(loss_path, state.loss_trace);
  manifest.config_json = state.config.to_json();
  manifest.artifacts = {ckpt.filename().string(), loss_path.filename().string()};
  manifest.exit_code = code;
  manifest.finished_at = utc_timestamp();
  manifest.write(parent_or_cwd(ckpt) / "manifest.json");
  if (!state.loss_trace.empty()) out << "final loss " << fmt_double(state.loss_trace.back()) << "\n";
  return code;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string ckpt;
  std::string data;
  std::string report;
  std::size_t max_len = 0;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  RunManifest manifest;
  manifest.command = "eval";
  manifest.started_at = utc_timestamp();

  const Checkpoint ck = load_checkpoint(a.ckpt);
  const Dataset data = load_dataset(a.data);
  if (data.examples.empty()) throw UsageError("eval: dataset " + a.data + " holds no scenes");
  if (!(ck.vocab == data.vocab)) {
    throw CompatibilityError("eval: checkpoint vocabulary (" + std::to_string(ck.vocab.size()) +
                             " ids) differs from the dataset vocabulary (" + std::to_string(data.vocab.size()) + " ids)");
  }
  if (data.feature_dim() != ck.state.config.dims.feature) {
    throw CompatibilityError("eval: dataset feature dim " + std::to_string(data.feature_dim()) +
                             " differs from the checkpoint's " + std::to_string(ck.state.config.dims.feature));
  }
  const std::size_t max_len = a.max_len ? a.max_len : ck.state.config.max_caption_len;
  const auto decoded = decode_dataset(data, ck.state.params, ck.state.config.decoder_options(), max_len);

  std::vector<Tokens> candidates;
  std::vector<ReferenceSet> references;
  std::vector<std::string> names;
  std::string captions;
  for (std::size_t i = 0; i < data.examples.size(); ++i) {
    const auto text = detokenize(decoded[i], data.vocab);
    captions += text + "\n";
    candidates.push_back(split_tokens(text));
    ReferenceSet refs;
    for (const auto& r : data.examples[i].references) refs.push_back(split_tokens(detokenize(r, data.vocab)));
    references.push_back(std::move(refs));
    names.push_back(data.examples[i].name);
  }
  const EvalReport report = evaluate_corpus(candidates, references, names);

  const fs::path report_path(a.report);
  ensure_directory(parent_or_cwd(report_path));
  const fs::path captions_path = parent_or_cwd(report_path) / (report_path.stem().string() + ".captions.txt");
  write_file_atomically(report_path, report.to_json());
  write_file_atomically(captions_path, captions);

  nlohmann::json cfg;
  cfg["checkpoint"] = a.ckpt;
  cfg["data"] = a.data;
  cfg["max_len"] = max_len;
  manifest.config_json = cfg.dump();
  manifest.seed = ck.state.config.seed;
  manifest.artifacts = {report_path.filename().string(), captions_path.filename().string()};
  manifest.finished_at = utc_timestamp();
  manifest.write(parent_or_cwd(report_path) / "manifest.json");

  out << std::fixed << std::setprecision(4) << "BLEU-1 " << report.bleu[0] << "  BLEU-4 " << report.bleu[3]
      << "  ROUGE-L " << report.rouge_l << "  CIDEr-D " << report.cider_d << "\n";
  return kExitOk;
}

// ---- gradcheck -------------------------------------------------------------

struct GradcheckArgs {
  std::string dims = "D=16,d=6,e=5,V=12";
  std::string variant = "all";
  std::string fusion = "all";
  unsigned long long seed = 0;
  double eps = 1e-5;
  double tolerance = 1e-4;
  bool corrupt = false;
  std::string out;
};

ModelDims parse_dims(const std::string& spec) {
  ModelDims dims{16, 6, 5, 0, 12};
  std::stringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("gradcheck: malformed --dims entry '" + item + "'");
    const std::string key = item.substr(0, eq);
    std::size_t value = 0;
    try {
      std::size_t used = 0;
      value = std::stoul(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("gradcheck: --dims value in '" + item + "' is not an integer");
    }
    if (key == "D") dims.feature = value;
    else if (key == "d") dims.hidden = value;
    else if (key == "e") dims.embed = value;
    else if (key == "A" || key == "att") dims.attention = value;
    else if (key == "V") dims.vocab = value;
    else throw UsageError("gradcheck: unknown --dims key '" + key + "' (expected D, d, e, A, V)");
  }
  if (dims.attention == 0) dims.attention = dims.hidden;
  return dims;
}

int cmd_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  RunManifest manifest;
  manifest.command = "gradcheck";
  manifest.started_at = utc_timestamp();
  manifest.seed = a.seed;

  const ModelDims dims = parse_dims(a.dims);
  dims.validate();
  const std::size_t count = param_count(dims);
  if (count >= kMaxGradCheckParams) {
    throw UsageError("gradcheck: refusing oversize dims, estimated " + std::to_string(count) + " parameters (limit " +
                     std::to_string(kMaxGradCheckParams) + ")");
  }

  std::vector<int> variants = a.variant == "all" ? std::vector<int>{1, 2, 3} : std::vector<int>{std::stoi(a.variant)};
  std::vector<FusionMode> modes = a.fusion == "all" ? std::vector<FusionMode>{FusionMode::Early, FusionMode::Late}
                                                    : std::vector<FusionMode>{fusion_from_string(a.fusion)};
  GradCheckOptions check;
  check.eps = a.eps;
  check.corrupt_offset = a.corrupt ? 0.1 : 0.0;

  out << "gradient check at D=" << dims.feature << " d=" << dims.hidden << " e=" << dims.embed
      << " att=" << dims.attention << " |V|=" << dims.vocab << " (" << count << " parameters, eps " << a.eps << ")\n";
  bool all_ok = true;
  for (FusionMode mode : modes) {
    for (int v : variants) {
      DecoderOptions opts;
      opts.mode = mode;
      opts.flags = VariantFlags::variant(v);
      const auto t0 = std::chrono::steady_clock::now();
      const auto result = check_decoder_gradients(dims, opts, a.seed, check);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const bool ok = result.max_error <= a.tolerance;
      all_ok = all_ok && ok;
      out << (ok ? "PASS" : "FAIL") << "  fusion=" << to_string(mode) << " variant=" << v
          << "  max_rel_error=" << std::scientific << std::setprecision(3) << result.max_error << std::defaultfloat
          << "  (" << std::fixed << std::setprecision(2) << secs << " s)" << std::defaultfloat << "\n";
      for (std::size_t i = 0; i < result.names.size(); ++i) {
        out << "    " << std::left << std::setw(8) << result.names[i] << std::right << std::scientific
            << std::setprecision(3) << result.errors[i] << std::defaultfloat << "\n";
      }
    }
  }
  out << (all_ok ? "all gradient checks passed" : "gradient check FAILED") << "\n";

  if (!a.out.empty()) {
    ensure_directory(a.out);
    nlohmann::json cfg;
    cfg["dims"] = a.dims;
    cfg["variant"] = a.variant;
    cfg["fusion"] = a.fusion;
    cfg["eps"] = a.eps;
    cfg["corrupt"] = a.corrupt;
    manifest.config_json = cfg.dump();
    manifest.exit_code = all_ok ? kExitOk : kExitVerificationFailed;
    manifest.finished_at = utc_timestamp();
    manifest.write(fs::path(a.out) / "manifest.json");
  }
  return all_ok ? kExitOk : kExitVerificationFailed;
}

}  // namespace

unsigned long long default_seed() {
  if (const char* env = std::getenv("AITPR_SEED"); env && *env) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (end && *end == '\0') return v;
  }
  return 0;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"aitpr: attribute/interaction tensor-product caption decoder"};
  app.require_subcommand(1);

  SynthArgs synth;
  synth.seed = default_seed();
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scene dataset");
  synth_cmd->add_option("--scenes", synth.scenes, "Number of scenes")->required();
  synth_cmd->add_option("--seed", synth.seed, "Root seed (default $AITPR_SEED or 0)");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--dim", synth.dim, "Feature dimension D")->capture_default_str();
  synth_cmd->add_option("--noise", synth.noise, "Feature noise sigma")->capture_default_str();
  synth_cmd->add_option("--max-objects", synth.max_objects, "Objects per scene upper bound")->capture_default_str();
  synth_cmd->add_option("--world-seed", synth.world_seed, "Seed for prototypes and projections");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a decoder with teacher forcing");
  train_cmd->add_option("--data", train_args.data, "Dataset directory")->required();
  train_cmd->add_option("--out", train_args.out, "Checkpoint path")->required();
  train_cmd->add_option("--config", train_args.config, "JSON config with flat TrainConfig keys");
  train_cmd->add_option("--resume", train_args.resume, "Continue from this checkpoint");
  train_args.variant_opt = train_cmd->add_option("--variant", train_args.variant, "Semantic-correction variant {1,2,3}")
                               ->check(CLI::IsMember({1, 2, 3}));
  train_args.fusion_opt =
      train_cmd->add_option("--fusion", train_args.fusion, "Fusion mode {early,late}")->check(CLI::IsMember({"early", "late"}));
  train_args.epochs_opt = train_cmd->add_option("--epochs", train_args.epochs, "Total epochs");
  train_args.lr_opt = train_cmd->add_option("--lr", train_args.lr, "Learning rate");
  train_args.batch_opt = train_cmd->add_option("--batch-size", train_args.batch_size, "Examples per update");
  train_args.seed_opt = train_cmd->add_option("--seed", train_args.seed, "Root seed (default $AITPR_SEED or 0)");
  train_args.hidden_opt = train_cmd->add_option("--hidden", train_args.hidden, "Hidden dim d");
  train_args.embed_opt = train_cmd->add_option("--embed", train_args.embed, "Embedding dim e");
  train_args.attention_opt = train_cmd->add_option("--attention", train_args.attention, "Attention dim");
  train_args.clip_opt = train_cmd->add_option("--grad-clip", train_args.grad_clip, "Global gradient-norm clip");
  train_cmd->add_flag("--quiet", train_args.quiet, "No per-epoch progress");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Decode a dataset greedily and score it");
  eval_cmd->add_option("--ckpt", eval_args.ckpt, "Checkpoint")->required();
  eval_cmd->add_option("--data", eval_args.data, "Dataset directory")->required();
  eval_cmd->add_option("--report", eval_args.report, "Report JSON path")->required();
  eval_cmd->add_option("--max-len", eval_args.max_len, "Caption length cap including <bos>/<eos>");

  GradcheckArgs gc;
  gc.seed = default_seed();
  auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference check of every decoder gradient");
  gc_cmd->add_option("--dims", gc.dims, "e.g. D=16,d=6,e=5,V=12[,A=6]")->capture_default_str();
  gc_cmd->add_option("--variant", gc.variant, "{1,2,3,all}")->check(CLI::IsMember({"1", "2", "3", "all"}))->capture_default_str();
  gc_cmd->add_option("--fusion", gc.fusion, "{early,late,all}")->check(CLI::IsMember({"early", "late", "all"}))->capture_default_str();
  gc_cmd->add_option("--seed", gc.seed, "Seed for the random problem");
  gc_cmd->add_option("--eps", gc.eps, "Central-difference step")->capture_default_str();
  gc_cmd->add_option("--tolerance", gc.tolerance, "Max relative error allowed")->capture_default_str();
  gc_cmd->add_flag("--corrupt-gradient", gc.corrupt, "Debug: perturb one analytic gradient entry by 0.1");
  gc_cmd->add_option("--out", gc.out, "Directory for manifest.json");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (synth_cmd->parsed()) return cmd_synth(synth, out);
    if (train_cmd->parsed()) return cmd_train(train_args, out, err);
    if (eval_cmd->parsed()) return cmd_eval(eval_args, out);
    if (gc_cmd->parsed()) return cmd_gradcheck(gc, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitUsage;
}

}  // namespace aitpr::cli
