#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(DEBIAS_CLI_PATH) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("debias_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string file(const std::string& name, const std::string& body) {
    const auto p = (dir_ / name).string();
    std::ofstream(p) << body;
    return p;
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::string read(const std::string& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t lines_with(const std::string& text, const std::string& prefix) {
  std::istringstream is(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line))
    if (line.rfind(prefix, 0) == 0) ++n;
  return n;
}

}  // namespace

TEST_F(Cli, TheoryQuadratic) {
  const auto r = run("theory --problem quad1d --xstar 0 --sigma 1 --ck 1");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("\nsigma2,2\n"), std::string::npos);
  EXPECT_NE(r.out.find("\nmargin_shift,1\n"), std::string::npos);
  EXPECT_EQ(lines_with(r.out, "# config "), 1u);
  EXPECT_EQ(lines_with(r.out, "# generated "), 1u);
}

TEST_F(Cli, EntropyCovarianceIsMillerMadow) {
  const auto data = file("ent.csv", "# dim=3 variant=euclidean\n1,0,0\n0,1,0\n0,0,1\n1,0,0\n");
  const auto r = run("estimate --data " + data + " --function entropy --method cov --no-header");
  ASSERT_EQ(r.code, 0) << r.out;
  // H(1/2, 1/4, 1/4) + (3 - 1) / (2 * 4)
  const double want = -(0.5 * std::log(0.5) + 0.5 * std::log(0.25)) + 0.25;
  const auto row = r.out.substr(r.out.find("entropy,cov"));
  const double got = std::stod(row.substr(row.rfind(',') + 1));
  EXPECT_NEAR(got, want, 1e-15);
}

TEST_F(Cli, SingleRowShiftHasZeroCorrection) {
  const auto data = file("one.csv", "# dim=2 variant=euclidean\n0.5,1\n");
  const auto a = file("A.csv", "2,0\n0,1\n");
  const auto r = run("estimate --data " + data + " --function quadratic:" + a + " --method shift --no-header");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("quadratic,shift,1,10,1.5,0,1.5"), std::string::npos) << r.out;
}

TEST_F(Cli, ParseErrorsExitTwoAndNameTheRow) {
  const auto a = file("A.csv", "1,0\n0,1\n");
  const auto bad = file("bad.csv", "# dim=2 variant=euclidean\n1,2\n3,oops\n");
  auto r = run("estimate --data " + bad + " --function quadratic:" + a);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("line 3"), std::string::npos);
  const auto short_row = file("short.csv", "# dim=2 variant=euclidean\n1,2\n3\n");
  EXPECT_EQ(run("estimate --data " + short_row + " --function quadratic:" + a).code, 2);
  EXPECT_EQ(run("estimate --data " + path("missing.csv") + " --function entropy").code, 2);
  EXPECT_EQ(run("bench P1 --trials abc").code, 2);
  EXPECT_EQ(run("bench P1 --unknown-flag").code, 2);
}

TEST_F(Cli, ConfigErrorsExitThree) {
  auto r = run("bench P9");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.out.find("P1, P2, P3, P4, P5, P6, P7"), std::string::npos);
  EXPECT_EQ(run("bench P4 --method cov --trials 2").code, 3);
  EXPECT_EQ(run("bench P1 --method median --trials 2").code, 3);
  EXPECT_EQ(run("bench P1 -p alpha=1 --trials 2").code, 3);
  EXPECT_EQ(run("sweep P1 --axis alpha --values 1,2 --trials 2").code, 3);
  const auto data = file("d.csv", "# dim=2 variant=euclidean\n1,2\n3,4\n");
  const auto nonspd = file("N.csv", "1,2\n2,1\n");
  EXPECT_EQ(run("estimate --data " + data + " --function quadratic:" + nonspd).code, 3);
  EXPECT_EQ(run("estimate --data " + data + " --function cubic").code, 3);
  const auto emp = file("e.csv", "# dim=2 variant=empirical\n1,2\n");
  EXPECT_EQ(run("estimate --data " + emp + " --function entropy").code, 3);
  EXPECT_EQ(run("bench P1 --trials 2 --out /nonexistent-dir/x.csv").code, 3);
}

TEST_F(Cli, NumericFailureExitsFour) {
  const auto data = file("z.csv", "# dim=2 variant=euclidean\n0,0\n0,0\n");
  const auto a = file("A.csv", "1,0\n0,1\n");
  EXPECT_EQ(run("estimate --data " + data + " --function quadratic:" + a + " --method scale").code, 4);
  const auto neg = file("neg.csv", "# dim=1 variant=euclidean\n-1\n3\n");
  const auto b = file("b.csv", "1\n");
  EXPECT_EQ(run("estimate --data " + neg + " --function rational:" + b + ":" + b + " --method shift --k 200").code, 4);
}

TEST_F(Cli, SweepRowsPerMethod) {
  const auto r = run("sweep P1 --axis sigma --values 0.5,1,2 --trials 5 -p d=3 --no-header");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(lines_with(r.out, "P1,shift,sigma,"), 3u);
  EXPECT_EQ(lines_with(r.out, "P1,scale,sigma,"), 3u);
  EXPECT_EQ(lines_with(r.out, "P1,cov,sigma,"), 3u);
}

TEST_F(Cli, TransportSingleCell) {
  const auto c = file("c.csv", "2.75\n");
  const auto r = run("transport --cost " + c + " --uniform --no-header");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.rfind("value,2.75\n", 0), 0u);
  const auto c2 = file("c2.csv", "0,1\n1,0\n");
  const auto s = file("s.csv", "0.3,0.7\n");
  const auto d = file("d.csv", "0.5\n0.5\n");
  const auto r2 = run("transport --cost " + c2 + " --supply " + s + " --demand " + d + " --no-header");
  ASSERT_EQ(r2.code, 0) << r2.out;
  EXPECT_EQ(r2.out.rfind("value,0.2", 0), 0u) << r2.out;
  const auto unbalanced = file("u.csv", "0.5,0.6\n");
  EXPECT_EQ(run("transport --cost " + c2 + " --supply " + s + " --demand " + unbalanced).code, 3);
}

TEST_F(Cli, DeterministicAcrossWorkers) {
  const auto a = run("bench P1 -p d=4 --trials 40 --seed 11 --workers 1 --no-header");
  const auto b = run("bench P1 -p d=4 --trials 40 --seed 11 --workers 5 --no-header");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, run("bench P1 -p d=4 --trials 40 --seed 12 --workers 1 --no-header").out);
}

TEST_F(Cli, ConfigFileAndEnvSeed) {
  const auto cfg = file("cfg.txt", "# defaults\ntrials=6\nseed=4\nno-header=true\nparam=d=3\n");
  const auto via_file = run("bench P1 --config " + cfg);
  const auto via_flags = run("bench P1 --trials 6 --seed 4 -p d=3 --no-header");
  ASSERT_EQ(via_file.code, 0) << via_file.out;
  EXPECT_EQ(via_file.out, via_flags.out);
  const auto over = run("bench P1 --config " + cfg + " --trials 8");
  EXPECT_NE(over.out.find(",8,4,"), std::string::npos) << over.out;
  const auto env = run("bench P1 -p d=3 --trials 6 --no-header");
  const auto env5 = run("bench P1 -p d=3 --trials 6 --no-header --seed 5");
  const auto viaenv = [&] {
    const std::string cmd = "DEBIAS_SEED=5 " + std::string(DEBIAS_CLI_PATH) + " bench P1 -p d=3 --trials 6 --no-header";
    FILE* p = popen(cmd.c_str(), "r");
    std::string out;
    char buf[4096];
    while (std::size_t n = fread(buf, 1, sizeof buf, p)) out.append(buf, n);
    pclose(p);
    return out;
  }();
  EXPECT_EQ(viaenv, env5.out);
  EXPECT_NE(viaenv, env.out);
}

TEST_F(Cli, BenchWritesCsvAndSvg) {
  const auto out = path("p1.csv");
  const auto r = run("bench P1 -p d=3 --trials 5 --out " + out);
  ASSERT_EQ(r.code, 0) << r.out;
  const auto csv = read(out);
  EXPECT_EQ(lines_with(csv, "# config subcommand=bench problem=P1"), 1u);
  EXPECT_NE(csv.find("problem,method,axis,axis_value,n,K,R,seed,rmse_r,bias_r"), std::string::npos);
  EXPECT_NE(read(path("p1.svg")).find("<polyline"), std::string::npos);
  const auto js = path("p1.json");
  ASSERT_EQ(run("bench P1 -p d=3 --trials 5 --format json --out " + js).code, 0);
  EXPECT_NE(read(js).find("\"rmse_r\""), std::string::npos);
}

TEST_F(Cli, HelpExitsZero) { EXPECT_EQ(run("--help").code, 0); }
