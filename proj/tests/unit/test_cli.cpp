#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "helpers.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result cli(const std::string& args) {
  const auto log = fs::temp_directory_path() / "insane_cli_test_out.txt";
  const std::string cmd = std::string(INSANE_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = testing_util::scratch_dir("cli");
    std::ofstream(dir_ / "small.json") << R"({"height": 32, "width": 32, "spectrum_len": 32, "read_index": 24})";
    ASSERT_EQ(cli("generate --config " + (dir_ / "small.json").string() + " --out " + (dir_ / "ds").string()).code, 0);
  }
  static fs::path dir_;
  static std::string ds() { return (dir_ / "ds").string(); }
  static std::string at(const std::string& name) { return (dir_ / name).string(); }
};

fs::path Cli::dir_;

}  // namespace

TEST_F(Cli, GenerateWritesDatasetAndSummary) {
  const auto r = cli("generate --out " + at("default_ds"));
  EXPECT_EQ(r.code, 0) << r.out;
  for (const char* f : {"manifest.json", "image.f32", "spectra.f32", "voltage.f32", "labels.u8"})
    EXPECT_TRUE(fs::exists(dir_ / "default_ds" / f)) << f;
  EXPECT_NE(r.out.find("dataset_variability="), std::string::npos);
  EXPECT_NE(r.out.find("anomaly"), std::string::npos);
}

TEST_F(Cli, GenerateErrors) {
  std::ofstream(dir_ / "bad.json") << "{\"height\": 32,,}";
  const auto bad = cli("generate --config " + at("bad.json") + " --out " + at("x"));
  EXPECT_EQ(bad.code, 2) << bad.out;
  EXPECT_NE(bad.out.find("bad.json:1:"), std::string::npos) << bad.out;
  std::ofstream(dir_ / "plainfile") << "x";
  EXPECT_EQ(cli("generate --out " + at("plainfile") + "/sub").code, 3);
}

TEST_F(Cli, ScoreMap) {
  EXPECT_EQ(cli("score-map --dataset " + ds() + " --method dtc --out " + at("dtc")).code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "dtc.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "dtc.pgm"));
  EXPECT_EQ(cli("score-map --dataset " + ds() + " --method nn --k 0 --out " + at("nn")).code, 2);
  EXPECT_EQ(cli("score-map --dataset " + ds() + " --method bogus --out " + at("nn")).code, 2);
  const auto cap = cli("score-map --dataset " + ds() + " --method lof --max-points 1000 --out " + at("lof"));
  EXPECT_EQ(cap.code, 4);
  EXPECT_NE(cap.out.find("cap"), std::string::npos) << cap.out;
  EXPECT_EQ(cli("score-map --dataset " + at("nope") + " --method dtc --out " + at("z")).code, 3);
}

TEST_F(Cli, RunIsByteReproducibleAndThreadInvariant) {
  const std::string common = "run --dataset " + ds() +
                             " --mode insane --scorer if --steps 12 --init 5 --epochs 5 --eval-every 6 --seed 3";
  ASSERT_EQ(cli("--threads 1 " + common + " --out " + at("a.csv")).code, 0);
  ASSERT_EQ(cli(common + " --threads 4 --out " + at("b.csv")).code, 0);
  const auto c = cli(common + " --out " + at("c.csv"));
  ASSERT_EQ(c.code, 0);
  EXPECT_EQ(slurp(dir_ / "a.csv"), slurp(dir_ / "b.csv"));
  EXPECT_EQ(slurp(dir_ / "a.csv"), slurp(dir_ / "c.csv"));
  EXPECT_EQ(slurp(dir_ / "a.csv.json"), slurp(dir_ / "b.csv.json"));
  EXPECT_NE(c.out.find("final_nme="), std::string::npos);
  EXPECT_NE(c.out.find("jumps="), std::string::npos);

  const auto e = cli("eval --dataset " + ds() + " --trace " + at("a.csv") + " --epochs 5");
  EXPECT_EQ(e.code, 0) << e.out;
  EXPECT_NE(e.out.find("variability="), std::string::npos);
}

TEST_F(Cli, RunConfigFileAndErrors) {
  std::ofstream(dir_ / "run.json") << R"({"mode": "novelty", "n_steps": 3, "n_init": 4, "eval_every": 0,
                                          "fit": {"epochs": 2, "hidden": 4}})";
  EXPECT_EQ(cli("run --dataset " + ds() + " --config " + at("run.json") + " --out " + at("r.csv")).code, 0);
  EXPECT_EQ(cli("run --dataset " + ds() + " --mode scalarizer --scorer if --out " + at("s.csv")).code, 2);
  EXPECT_EQ(cli("run --dataset " + ds() + " --mode warp --out " + at("s.csv")).code, 2);
  EXPECT_EQ(cli("run --dataset " + ds() + " --steps 0 --out " + at("s.csv")).code, 2);
}

TEST_F(Cli, Baseline) {
  const auto ok = cli("baseline --dataset " + ds() + " --points 200 --realizations 200");
  EXPECT_EQ(ok.code, 0);
  EXPECT_NE(ok.out.find("baseline_mean="), std::string::npos);
  EXPECT_NE(ok.out.find(" baseline_std="), std::string::npos);
  EXPECT_EQ(cli("baseline --dataset " + ds() + " --points 5000 --realizations 10").code, 2);
  EXPECT_EQ(cli("baseline --dataset " + ds() + " --points 20 --realizations 1").code, 2);
}

TEST_F(Cli, HelpEverywhere) {
  EXPECT_EQ(cli("--help").code, 0);
  for (const char* sub : {"generate", "score-map", "run", "baseline", "eval"}) {
    const auto r = cli(std::string(sub) + " --help");
    EXPECT_EQ(r.code, 0) << sub;
    EXPECT_NE(r.out.find("--"), std::string::npos) << sub;
  }
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("run --no-such-flag").code, 2);
}
