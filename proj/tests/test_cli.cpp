#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sphreg/experiment.hpp"
#include "sphreg/rotations.hpp"
#include "sphreg_cli/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "sphreg");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = sphreg::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  const fs::path p = fs::temp_directory_path() / (std::string("sphreg_cli_") + info->name());
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

const std::vector<std::string> kTinyTrain = {"--task", "s1",   "--epochs", "2",  "--batch",
                                             "16",     "--n-train", "64", "--n-test", "16"};

}  // namespace

TEST(Cli, GradcheckPasses) {
  const Outcome o = invoke({"gradcheck", "--trials", "20"});
  EXPECT_EQ(o.code, 0) << o.out;
  const auto ls = lines(o.out);
  ASSERT_EQ(ls.size(), 18u);
  for (std::size_t i = 0; i + 1 < ls.size(); ++i) EXPECT_EQ(ls[i].rfind("PASS ", 0), 0u) << ls[i];
  EXPECT_EQ(ls.back().rfind("all gradient checks passed", 0), 0u);
}

TEST(Cli, SampleSo3WritesUnitQuaternions) {
  const Outcome o = invoke({"sample-so3", "--n", "100", "--seed", "3"});
  ASSERT_EQ(o.code, 0);
  std::istringstream is(o.out);
  const auto qs = sphreg::read_quaternions(is);
  ASSERT_EQ(qs.size(), 100u);
  for (const auto& q : qs) {
    EXPECT_NEAR(q.norm(), 1.0, 1e-8);
    EXPECT_TRUE(q.a >= 0.0);
  }
  EXPECT_EQ(invoke({"sample-so3", "--n", "100", "--seed", "3"}).out, o.out);

  const fs::path dir = scratch_dir();
  ASSERT_EQ(invoke({"sample-so3", "--n", "5", "--seed", "3", "--out", (dir / "q.txt").string()}).code, 0);
  std::ifstream in(dir / "q.txt");
  EXPECT_EQ(sphreg::read_quaternions(in).size(), 5u);
  fs::remove_all(dir);
}

TEST(Cli, TrainEvalReport) {
  const fs::path dir = scratch_dir();
  std::vector<std::string> args{"train", "--out", dir.string(), "--head", "sexp", "--loss", "cosine"};
  args.insert(args.end(), kTinyTrain.begin(), kTinyTrain.end());
  const Outcome t = invoke(args);
  ASSERT_EQ(t.code, 0) << t.err;
  const auto ls = lines(t.out);
  ASSERT_EQ(ls.size(), 3u);
  const fs::path run = ls[0];
  EXPECT_EQ(run.parent_path(), dir);
  EXPECT_EQ(ls[1], sphreg::kReportHeader);
  EXPECT_EQ(ls[2].rfind("s1,sexp,cosine,", 0), 0u);
  EXPECT_TRUE(fs::exists(run / "model.ckpt"));

  const Outcome e = invoke({"eval", "--pred", (run / "predictions.txt").string(), "--gt",
                            (run / "targets.txt").string(), "--task", "s1"});
  ASSERT_EQ(e.code, 0) << e.err;
  const auto el = lines(e.out);
  ASSERT_EQ(el.size(), 9u);
  EXPECT_EQ(el[0], "count 16");
  EXPECT_EQ(el[1].rfind("med_err ", 0), 0u);

  std::vector<std::string> direct{"train", "--out", dir.string(), "--head", "direct", "--loss", "smoothl1"};
  direct.insert(direct.end(), kTinyTrain.begin(), kTinyTrain.end());
  ASSERT_EQ(invoke(direct).code, 0);

  const Outcome r = invoke({"report", "--dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("# comparison"), std::string::npos);
  EXPECT_NE(r.out.find("# gradient variance"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "comparison.csv"));
  EXPECT_TRUE(fs::exists(dir / "grad_variance.csv"));
  std::ifstream cmp(dir / "comparison.csv");
  EXPECT_EQ(sphreg::read_report_csv(cmp).size(), 2u);
  fs::remove_all(dir);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const fs::path dir = scratch_dir();
  sphreg::ExperimentConfig cfg;
  cfg.task = sphreg::SphereKind::S2;
  cfg.epochs = 1;
  cfg.batch = 8;
  cfg.n_train = 16;
  cfg.n_test = 4;
  {
    std::ofstream os(dir / "cfg.json");
    os << sphreg::config_to_json(cfg);
  }
  const Outcome o = invoke({"train", "--config", (dir / "cfg.json").string(), "--out", dir.string(),
                            "--seed", "9"});
  ASSERT_EQ(o.code, 0) << o.err;
  cfg.seed = 9;
  EXPECT_EQ(fs::path(lines(o.out)[0]).filename(), sphreg::run_dir_name(cfg));
  fs::remove_all(dir);
}

TEST(Cli, DivergenceExitCode) {
  const fs::path dir = scratch_dir();
  std::vector<std::string> args{"train", "--out", dir.string(), "--head", "direct", "--loss", "l2",
                                "--lr", "1e12"};
  args.insert(args.end(), kTinyTrain.begin(), kTinyTrain.end());
  const Outcome o = invoke(args);
  EXPECT_EQ(o.code, 3);
  EXPECT_NE(o.err.find("diverged"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, BadArgumentsFail) {
  EXPECT_NE(invoke({}).code, 0);
  EXPECT_NE(invoke({"frobnicate"}).code, 0);
  EXPECT_NE(invoke({"sample-so3", "--n", "0", "--seed", "1"}).code, 0);
  EXPECT_NE(invoke({"train", "--out", "/tmp/x", "--task", "s9"}).code, 0);
  const Outcome inconsistent = invoke({"train", "--out", "/tmp/sphreg_cli_never", "--head", "flat",
                                       "--loss", "smoothl1"});
  EXPECT_EQ(inconsistent.code, 1);
  EXPECT_NE(inconsistent.err.find("error: "), std::string::npos);
  EXPECT_NE(invoke({"eval", "--pred", "/nonexistent", "--gt", "/nonexistent", "--task", "s1"}).code, 0);
  EXPECT_NE(invoke({"report", "--dir", "/nonexistent"}).code, 0);
}
