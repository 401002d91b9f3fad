#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "aitpr/features_io.hpp"
#include "cli/commands.hpp"
#include "cli/manifest.hpp"
#include "support.hpp"

namespace aitpr {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "aitpr");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) { return read_file(p); }

void expect_same_tree(const fs::path& a, const fs::path& b) {
  std::size_t count = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const fs::path other = b / entry.path().filename();
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(slurp(entry.path()), slurp(other)) << entry.path().filename();
    ++count;
  }
  EXPECT_EQ(count, static_cast<std::size_t>(std::distance(fs::directory_iterator(b), fs::directory_iterator())));
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override { setenv("SOURCE_DATE_EPOCH", "1700000000", 1); }
  void TearDown() override { unsetenv("SOURCE_DATE_EPOCH"); }
  test::TempDir dir{"aitpr_cli"};

  std::string path(const std::string& name) const { return (dir / name).string(); }

  void synth(const std::string& name, int scenes, int seed = 1) {
    const auto r = run({"synth", "--scenes", std::to_string(scenes), "--seed", std::to_string(seed), "--dim", "12",
                        "--out", path(name)});
    ASSERT_EQ(r.code, 0) << r.err;
  }

  void train(const std::string& data, const std::string& ckpt, int epochs = 2) {
    const auto r = run({"train", "--data", path(data), "--out", path(ckpt), "--epochs", std::to_string(epochs),
                        "--hidden", "10", "--embed", "6", "--attention", "6", "--lr", "0.01", "--quiet"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
};

TEST_F(Cli, SynthIsReproducible) {
  synth("a", 10);
  synth("b", 10);
  expect_same_tree(dir / "a", dir / "b");
}

TEST_F(Cli, SynthZeroScenesIsUsageError) {
  EXPECT_EQ(run({"synth", "--scenes", "0", "--out", path("x")}).code, 2);
}

TEST_F(Cli, SynthFileCount) {
  synth("d", 50);
  std::size_t json = 0, vocab = 0;
  for (const auto& e : fs::directory_iterator(dir / "d")) {
    const auto name = e.path().filename().string();
    if (name.rfind("scene_", 0) == 0 && e.path().extension() == ".json") ++json;
    if (name == "vocab.txt") ++vocab;
  }
  EXPECT_EQ(json, 50u);
  EXPECT_EQ(vocab, 1u);
  EXPECT_TRUE(fs::exists(dir / "d" / "manifest.json"));
}

TEST_F(Cli, SynthUnwritableOutIsIoError) {
  std::ofstream(dir / "file") << "x";
  EXPECT_EQ(run({"synth", "--scenes", "2", "--out", path("file") + "/sub"}).code, 3);
}

TEST_F(Cli, SeedFallsBackToEnvironment) {
  setenv("AITPR_SEED", "7", 1);
  synth("env", 3, 7);
  const auto r = run({"synth", "--scenes", "3", "--dim", "12", "--out", path("noseed")});
  unsetenv("AITPR_SEED");
  ASSERT_EQ(r.code, 0);
  expect_same_tree(dir / "env", dir / "noseed");
}

TEST_F(Cli, TrainRejectsBadVariant) {
  synth("d", 2);
  const auto r = run({"train", "--data", path("d"), "--variant", "4", "--out", path("m.ckpt")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("{1,2,3}"), std::string::npos) << r.err;
}

TEST_F(Cli, TrainMissingDataIsIoError) {
  EXPECT_EQ(run({"train", "--data", path("nope"), "--out", path("m.ckpt")}).code, 3);
}

TEST_F(Cli, TrainWritesCheckpointLossAndManifest) {
  synth("d", 3);
  train("d", "run/m.ckpt");
  EXPECT_TRUE(fs::exists(dir / "run" / "m.ckpt"));
  EXPECT_TRUE(fs::exists(dir / "run" / "m.loss.csv"));
  const std::string manifest = slurp(dir / "run" / "manifest.json");
  EXPECT_NE(manifest.find("\"command\": \"train\""), std::string::npos) << manifest;
  EXPECT_NE(manifest.find("config_hash"), std::string::npos);
}

TEST_F(Cli, TrainConfigFileAndOverride) {
  synth("d", 2);
  std::ofstream(dir / "cfg.json") << R"({"epochs": 1, "hidden_dim": 8, "embed_dim": 4, "attention_dim": 4, "variant": 1})";
  const auto r = run({"train", "--data", path("d"), "--config", path("cfg.json"), "--epochs", "2", "--quiet", "--out",
                      path("m.ckpt")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(dir / "m.loss.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  const std::string m = slurp(dir / "manifest.json");
  EXPECT_NE(m.find("\"hidden_dim\": 8"), std::string::npos) << m;
}

TEST_F(Cli, EvalIsReproducibleAndChecksVocabulary) {
  synth("d", 4);
  train("d", "m.ckpt");
  ASSERT_EQ(run({"eval", "--ckpt", path("m.ckpt"), "--data", path("d"), "--report", path("r1/report.json")}).code, 0);
  ASSERT_EQ(run({"eval", "--ckpt", path("m.ckpt"), "--data", path("d"), "--report", path("r2/report.json")}).code, 0);
  EXPECT_EQ(slurp(dir / "r1" / "report.json"), slurp(dir / "r2" / "report.json"));
  EXPECT_TRUE(fs::exists(dir / "r1" / "report.captions.txt"));

  // Same scenes with an extra vocabulary word.
  fs::copy(dir / "d", dir / "d2");
  std::ofstream(dir / "d2" / "vocab.txt", std::ios::app) << "purple\n";
  const auto r = run({"eval", "--ckpt", path("m.ckpt"), "--data", path("d2"), "--report", path("r3.json")});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("vocabulary"), std::string::npos) << r.err;
}

TEST_F(Cli, EvalEmptyDatasetIsUsageError) {
  synth("d", 2);
  train("d", "m.ckpt");
  fs::create_directories(dir / "empty");
  fs::copy_file(dir / "d" / "vocab.txt", dir / "empty" / "vocab.txt");
  EXPECT_EQ(run({"eval", "--ckpt", path("m.ckpt"), "--data", path("empty"), "--report", path("r.json")}).code, 2);
}

TEST_F(Cli, GradcheckDefaultPasses) {
  const auto r = run({"gradcheck"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n') > 6, true);
}

TEST_F(Cli, GradcheckCorruptedFails) {
  EXPECT_EQ(run({"gradcheck", "--variant", "1", "--fusion", "late", "--corrupt-gradient"}).code, 1);
}

TEST_F(Cli, GradcheckRefusesOversizeDims) {
  const auto r = run({"gradcheck", "--dims", "D=64,d=64,e=32,V=40"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("parameters"), std::string::npos) << r.err;
}

TEST(Manifest, HashIgnoresKeyOrder) {
  EXPECT_EQ(cli::config_hash(R"({"a": 1, "b": [1, 2]})"), cli::config_hash(R"({"b":[1,2],"a":1})"));
  EXPECT_NE(cli::config_hash(R"({"a": 1})"), cli::config_hash(R"({"a": 2})"));
  EXPECT_EQ(cli::config_hash("{}").size(), 16u);
}

}  // namespace
}  // namespace aitpr
