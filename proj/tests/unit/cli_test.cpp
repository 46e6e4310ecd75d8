#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bgq_cli/cli.hpp"

namespace {

using nlohmann::json;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = bgq::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("bgq_cli_test_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Cli, TimeConstantSingleValue) {
  const auto r = call({"tc", "--variant", "exp", "--x", "3"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "1.0\n");
}

TEST(Cli, TimeConstantGridCsv) {
  const auto r = call({"tc", "--variant", "cont_exp", "--grid", "0.5:4:0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "variant,params,x,f,maximizer");
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    const auto y = std::stod(line.substr(line.find(',', line.find(',') + 1) + 1));
    const auto f_start = line.find(',', line.find(',', line.find(',') + 1) + 1) + 1;
    const double f = std::stod(line.substr(f_start));
    if (y <= 1.0) {
      EXPECT_EQ(f, 0.0) << line;
    } else {
      EXPECT_GT(f, 0.0) << line;
    }
  }
  EXPECT_EQ(rows, 8);
}

TEST(Cli, ValidationErrorsExitTwo) {
  EXPECT_EQ(call({"tc", "--variant", "nope", "--x", "1"}).code, 2);
  EXPECT_EQ(call({"tc", "--variant", "exp", "--grid", ""}).code, 2);
  EXPECT_EQ(call({"tc", "--variant", "exp", "--x", "1", "--bogus"}).code, 2);
  EXPECT_EQ(call({"frobnicate"}).code, 2);
  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"queue", "--p", "1.5"}).code, 2);
  EXPECT_EQ(call({"--format", "xml", "tc", "--variant", "exp", "--x", "1"}).code, 2);
  EXPECT_EQ(call({"--config", "/nonexistent/bgq.json", "tc", "--variant", "exp", "--x", "1"}).code, 2);
}

TEST(Cli, HelpExitsZero) {
  const auto r = call({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("tandem"), std::string::npos);
}

TEST(Cli, DistPmfCsv) {
  const auto r = call({"dist", "pmf", "--kind", "ber_geom", "--p", "0.5", "--alpha", "0.5", "--kmax", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "k,pmf\n0,0.5\n1,0.25\n2,0.125\n");
}

TEST(Cli, DistSampleRepeatsWithSeed) {
  const auto a = call({"--seed", "5", "dist", "sample", "--spec", R"({"kind":"exp","rate":2})", "--n", "5"});
  const auto b = call({"--seed", "5", "dist", "sample", "--spec", R"({"kind":"exp","rate":2})", "--n", "5"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.substr(0, 6), "value\n");
  const auto c = call({"--seed", "6", "dist", "sample", "--spec", R"({"kind":"exp","rate":2})", "--n", "5"});
  EXPECT_NE(a.out, c.out);
}

TEST(Cli, QueueWritesTraceAndSummary) {
  const auto path = temp_file("trace.csv");
  const auto r = call({"--seed", "7", "--out", path.string(), "queue", "--slots", "200000"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto summary = json::parse(r.out);
  EXPECT_NEAR(summary["theory"]["oracle"]["mean_x"].get<double>(), 1.5, 1e-5);
  EXPECT_NEAR(summary["empirical"]["mean_x"].get<double>(), 1.5, 0.1);
  const auto text = slurp(path);
  EXPECT_EQ(text.substr(0, text.find('\n')), "n,A,S,X,Y,D,U,I,T");
  std::filesystem::remove(path);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const auto cfg = temp_file("config.json");
  {
    std::ofstream f(cfg);
    f << R"({"tc": {"variant": "exp", "x": 3}})";
  }
  auto r = call({"--config", cfg.string(), "tc"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "1.0\n");
  r = call({"--config", cfg.string(), "tc", "--x", "8"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "4.0\n");
  {
    std::ofstream f(cfg);
    f << R"({"tc": {"variant": "exp", "x": 3, "mystery": 1}})";
  }
  EXPECT_EQ(call({"--config", cfg.string(), "tc"}).code, 2);
  std::filesystem::remove(cfg);
}

TEST(Cli, PercIdentityReport) {
  const auto r = call({"perc", "identity", "--stages", "2", "--instances", "100"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["failures"], 0);
  EXPECT_EQ(j["instances"], 100);
}

TEST(Cli, PercSimulateThreadIndependent) {
  const std::vector<std::string> base = {"perc", "simulate", "--x", "1", "--size", "40", "--replicas", "6"};
  auto one = base;
  one.insert(one.begin(), {"--threads", "1"});
  auto three = base;
  three.insert(three.begin(), {"--threads", "3"});
  const auto a = call(one), b = call(three);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.substr(0, a.out.find('\n')), "x,N,mean,ci_lo,ci_hi,replicas,seed");
}

TEST(Cli, VerifySingleSuite) {
  const auto r = call({"verify", "--suite", "tc"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(json::parse(r.out)["passed"].get<bool>());
  EXPECT_EQ(call({"verify", "--suite", "nope"}).code, 2);
}

}  // namespace
