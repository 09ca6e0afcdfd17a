#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "avdelay/cli.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Run {
  int code;
  std::string out, err;
};

// Runs the installed binary inside `dir` so run.log lands there.
Run run_cli(const fs::path& dir, const std::string& args) {
  const std::string cmd = "cd '" + dir.string() + "' && '" AVDELAY_CLI_PATH "' " + args + " >stdout.txt 2>stderr.txt";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(dir / "stdout.txt"), slurp(dir / "stderr.txt")};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("avdelay_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "small.json") << R"({"scenario":{"days":2,"flights_per_day":300},
      "dataset":{"n":20},
      "model":{"lstm":{"epochs":1,"hidden1":4,"hidden2":4}},
      "experiment":{"modes":["ST"],"ns":[20],"models":["LR","LSTM"],"seeds":[1,2],
                    "params":{"lstm":{"epochs":1,"hidden1":4,"hidden2":4}}}})";
  }
  void TearDown() override { fs::remove_all(dir); }
  fs::path dir;
};

}  // namespace

TEST_F(Cli, HelpExitsZero) {
  const auto r = run_cli(dir, "--help");
  EXPECT_EQ(r.code, 0);
  for (const char* sub : {"synth", "ingest", "featurize", "dataset", "train", "evaluate", "predict"})
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
  EXPECT_EQ(run_cli(dir, "train --help").code, 0);
}

TEST_F(Cli, UnknownFlagIsValidationError) {
  const auto r = run_cli(dir, "synth --frobnicate");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("frobnicate"), std::string::npos);
  EXPECT_EQ(run_cli(dir, "").code, 1);
}

TEST_F(Cli, MissingInputIsValidationError) {
  const auto r = run_cli(dir, "train --train nowhere.avds --model LR --out m.ckpt");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("nowhere.avds"), std::string::npos);
  EXPECT_EQ(run_cli(dir, "featurize --in missing_dir --out f.csv").code, 1);
}

TEST_F(Cli, BadConfigIsValidationError) {
  std::ofstream(dir / "bad.json") << R"({"scenario":{"dayz":2}})";
  EXPECT_EQ(run_cli(dir, "synth --config bad.json --out s").code, 1);
  std::ofstream(dir / "broken.json") << "{not json";
  EXPECT_EQ(run_cli(dir, "synth --config broken.json --out s").code, 1);
}

TEST_F(Cli, FullChainAndRunLog) {
  ASSERT_EQ(run_cli(dir, "synth --config small.json --seed 7 --out scenario").code, 0);
  ASSERT_EQ(run_cli(dir, "ingest --config small.json --in scenario").code, 0);
  ASSERT_EQ(run_cli(dir, "featurize --config small.json --in scenario --out fused.csv").code, 0);
  ASSERT_EQ(run_cli(dir, "dataset --config small.json --in fused.csv --out ds --mode ST").code, 0);
  EXPECT_TRUE(fs::exists(dir / "ds" / "ST_N20_train.avds"));
  const auto train = run_cli(dir, "train --config small.json --train ds/ST_N20_train.avds --model LSTM --out m.ckpt");
  ASSERT_EQ(train.code, 0) << train.err;
  EXPECT_NE(train.out.find("epoch 1"), std::string::npos);
  ASSERT_EQ(run_cli(dir, "predict --config small.json --model m.ckpt --data ds/ST_N20_test.avds --out p.csv").code, 0);
  EXPECT_EQ(slurp(dir / "p.csv").rfind("last_ts,predicted_delay_min,true_delay_min\n", 0), 0u);
  ASSERT_EQ(run_cli(dir, "evaluate --config small.json --in fused.csv --out report").code, 0);
  EXPECT_TRUE(fs::exists(dir / "report" / "report.json"));
  EXPECT_TRUE(fs::exists(dir / "report" / "report.txt"));

  std::istringstream log(slurp(dir / "run.log"));
  const std::regex line(R"(^\d{4}-\d\d-\d\dT\d\d:\d\d:\d\dZ (\w+) ([0-9a-f]{64}|-) (\S+) (\d) avdelay/\S+$)");
  std::vector<std::string> subs;
  std::string l;
  while (std::getline(log, l)) {
    std::smatch m;
    ASSERT_TRUE(std::regex_match(l, m, line)) << l;
    subs.push_back(m[1]);
    EXPECT_EQ(m[4], "0");
    if (m[1] == "synth") {
      EXPECT_EQ(m[3], "7");
    }
    if (m[1] == "evaluate") {
      EXPECT_EQ(m[3], "1,2");
    }
  }
  EXPECT_EQ(subs, (std::vector<std::string>{"synth", "ingest", "featurize", "dataset", "train", "predict", "evaluate"}));
}

TEST_F(Cli, SynthIsDeterministicAndFailuresAreLogged) {
  ASSERT_EQ(run_cli(dir, "synth --config small.json --seed 3 --out a").code, 0);
  ASSERT_EQ(run_cli(dir, "synth --config small.json --seed 3 --out b").code, 0);
  for (const char* f : {"flights.csv", "trajectories.csv", "weather.csv", "ground_truth.json"})
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  run_cli(dir, "predict --model none.ckpt --data none.avds --out p.csv");
  const auto log = slurp(dir / "run.log");
  EXPECT_NE(log.find(" predict "), std::string::npos);
  EXPECT_NE(log.find(" 1 avdelay/"), std::string::npos);
}

TEST(CliConfig, JsonRoundTripAndHashStability) {
  avdelay::cli::RunConfig c;
  c.dataset.n = 45;
  c.model_seed = 9;
  const auto j = avdelay::cli::to_json(c);
  EXPECT_EQ(avdelay::cli::to_json(avdelay::cli::run_config_from_json(j)), j);
  EXPECT_EQ(avdelay::cli::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(avdelay::cli::sha256_hex(j.dump()), avdelay::cli::sha256_hex(avdelay::cli::to_json(c).dump()));
}
