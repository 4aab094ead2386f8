#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int code = -1;
  std::string out;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("pytype_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CmdResult run(const std::string& args) {
    const std::string cmd = "cd '" + dir_.string() + "' && '" PYTYPE_CLI "' " + args + " 2>stderr.txt";
    CmdResult r;
    FILE* p = popen(cmd.c_str(), "r");
    char buf[4096];
    while (std::size_t k = std::fread(buf, 1, sizeof buf, p)) r.out.append(buf, k);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
  }
  std::string read(const std::string& name) {
    std::ifstream in(dir_ / name);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, VersionAndHelp) {
  EXPECT_EQ(run("--version").code, 0);
  const auto h = run("fit --help");
  EXPECT_EQ(h.code, 0);
  for (const char* flag : {"--input", "--m", "--profile", "--m-max", "--sandwich", "--out", "--force"}) {
    EXPECT_NE(h.out.find(flag), std::string::npos) << flag;
  }
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("fit").code, 2);
  EXPECT_EQ(run("fit --input x.csv --bogus").code, 2);
  EXPECT_EQ(run("simulate --py 0.5,1 --n 0 --out a.csv").code, 2);
  EXPECT_EQ(run("simulate --py 0.5 --n 10 --out a.csv").code, 2);
  EXPECT_EQ(run("simulate --py 0.5,1 --power-law 2 --n 10 --out a.csv").code, 2);
  EXPECT_EQ(run("posterior --input a.csv --prior gamma").code, 2);
}

TEST_F(Cli, IoErrorsExitOne) {
  EXPECT_EQ(run("fit --input missing.csv").code, 1);
  std::ofstream(dir_ / "bad.csv") << "species,count\na,notanumber\n";
  EXPECT_EQ(run("fit --input bad.csv").code, 1);
}

TEST_F(Cli, SimulateFitRoundTrip) {
  ASSERT_EQ(run("simulate --py 0.5,1 --n 3000 --seed 4 --out s.csv").code, 0);
  const auto stats = nlohmann::json::parse(read("s.stats.json"));
  EXPECT_EQ(stats.at("n"), 3000);
  EXPECT_EQ(stats.at("provenance").at("seed"), 4);
  const auto a = run("fit --input s.csv --m 1");
  const auto b = run("fit --input s.stats.json --m 1");
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(b.code, 0);
  const auto ja = nlohmann::json::parse(a.out);
  const auto jb = nlohmann::json::parse(b.out);
  EXPECT_EQ(ja.at("result").at("sigma_hat"), jb.at("result").at("sigma_hat"));
  EXPECT_NEAR(ja.at("result").at("sigma_hat").get<double>(), 0.5, 0.1);
  const auto& prov = ja.at("provenance");
  EXPECT_EQ(prov.at("tool"), "pytype");
  EXPECT_EQ(prov.at("inputs").at(0).at("sha256").get<std::string>().size(), 64u);
  EXPECT_EQ(prov.at("config").at("m"), 1.0);
}

TEST_F(Cli, SimulationIsReproducible) {
  ASSERT_EQ(run("simulate --power-law 2 --n 2000 --seed 8 --out a.csv --occupancy").code, 0);
  ASSERT_EQ(run("simulate --power-law 2 --n 2000 --seed 8 --out b.csv --occupancy").code, 0);
  EXPECT_EQ(read("a.csv"), read("b.csv"));
}

TEST_F(Cli, RefusesToOverwrite) {
  ASSERT_EQ(run("simulate --py 0.3,2 --n 100 --out s.csv").code, 0);
  const auto before = read("s.csv");
  EXPECT_EQ(run("simulate --py 0.3,2 --n 100 --seed 2 --out s.csv").code, 1);
  EXPECT_EQ(read("s.csv"), before);
  EXPECT_EQ(run("simulate --py 0.3,2 --n 100 --seed 2 --out s.csv --force").code, 0);
  EXPECT_NE(read("s.csv"), before);
  std::ofstream(dir_ / "r.json") << "{}";
  EXPECT_EQ(run("fit --input s.csv --out r.json").code, 1);
  EXPECT_EQ(read("r.json"), "{}");
}

TEST_F(Cli, ProfileFitAndPosterior) {
  ASSERT_EQ(run("simulate --py 0.4,5 --n 4000 --out s.csv").code, 0);
  const auto p = run("fit --input s.csv --profile --m-max 30 --sandwich");
  ASSERT_EQ(p.code, 0);
  const auto jp = nlohmann::json::parse(p.out);
  EXPECT_TRUE(jp.at("result").at("M_hat").is_number());
  EXPECT_TRUE(jp.at("result").at("se_sandwich").is_number());
  const auto q = run("posterior --input s.csv --prior beta:2,2 --m-uniform 20 --level 0.9");
  ASSERT_EQ(q.code, 0);
  const auto jq = nlohmann::json::parse(q.out);
  EXPECT_LT(jq.at("interval").at("lower").get<double>(), jq.at("interval").at("upper").get<double>());
  EXPECT_EQ(jq.at("provenance").at("config").at("prior").at("M").at("kind"), "uniform");
}

TEST_F(Cli, AllDistinctSampleWarns) {
  std::ofstream f(dir_ / "d.csv");
  f << "species\n";
  for (int i = 0; i < 30; ++i) f << "t" << i << "\n";
  f.close();
  const auto r = run("fit --input d.csv");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("result").at("boundary"), "UpperSigma");
  EXPECT_FALSE(j.at("warnings").empty());
}

TEST_F(Cli, LikelihoodRatio) {
  ASSERT_EQ(run("simulate --power-law 2 --n 5000 --seed 3 --out db.csv --occupancy").code, 0);
  const auto r = run("lr --db db.csv --crime-profile new_profile --m 0");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_GT(j.at("lr").get<double>(), 5001.0);
  EXPECT_NEAR(j.at("log10_lr").get<double>(), std::log10(j.at("lr").get<double>()), 1e-12);
  EXPECT_EQ(j.at("database_size"), 5000);
  const double s = j.at("plug_in").at("sigma_hat").get<double>();
  EXPECT_NEAR(j.at("plug_in").at("plug_in_centre").get<double>(), 1.0 / (1.0 - s), 1e-12);
  EXPECT_EQ(run("lr --db db.csv --crime-profile s1").code, 1);
}

TEST_F(Cli, VerifyFast) {
  const auto r = run("verify --fast --out v.json");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  EXPECT_TRUE(nlohmann::json::parse(read("v.json")).at("passed").get<bool>());
}

TEST_F(Cli, ExperimentReportsAreByteIdenticalAcrossThreads) {
  std::ofstream(dir_ / "cfg.json") << R"({"population":{"kind":"power_law","alpha":2},"n_grid":[2000],
    "replications":10,"seed":3,"checks":["Normality","RootRate"]})";
  run("--threads 1 experiment --config cfg.json --out a.json");
  run("--threads 4 experiment --config cfg.json --out b.json");
  const auto a = read("a.json");
  ASSERT_FALSE(a.empty());
  EXPECT_EQ(a, read("b.json"));
  const auto j = nlohmann::json::parse(a);
  EXPECT_EQ(j.at("provenance").at("seed"), 3);
  EXPECT_FALSE(j.at("provenance").at("config").contains("threads"));
  run("experiment --config cfg.json --seed 4 --replications 12 --out c.json");
  const auto c = nlohmann::json::parse(read("c.json"));
  EXPECT_EQ(c.at("seed"), 4);
  EXPECT_EQ(c.at("config").at("replications"), 12);
  EXPECT_EQ(run("experiment --config cfg.json --checks Bogus").code, 1);
}
