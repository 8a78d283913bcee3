#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "cli/report.hpp"

namespace fs = std::filesystem;
using namespace hwt::cli;

namespace {

const fs::path kData = HWT_TEST_DATA_DIR;
const fs::path kGolden = HWT_TEST_GOLDEN_DIR;

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "hwt");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hwt_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Cli, GoldenCsv) {
  const auto dir = scratch("golden");
  const auto r = run({"experiment", "--config", (kData / "small.json").string(), "--out", dir.string()});
  ASSERT_EQ(r.code, kExitPass) << r.err;
  EXPECT_EQ(slurp(dir / "summary.csv"), slurp(kGolden / "small_summary.csv"));
}

TEST(Cli, CsvHeaderAndRowShape) {
  const auto dir = scratch("shape");
  ASSERT_EQ(run({"experiment", "--config", (kData / "small.json").string(), "--out", dir.string()}).code, 0);
  std::ifstream is(dir / "summary.csv");
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "theta,p_hat,ci_low,ci_high,bound,t_star,verdict");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 6);
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "pass");
  }
  EXPECT_EQ(rows, 5);
  const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(report.at("verdict"), "pass");
  EXPECT_TRUE(report.at("assumptions").at("all_ok").get<bool>());
  EXPECT_EQ(report.at("rows").size(), 5u);
  EXPECT_TRUE(report.at("rows")[0].at("bound").contains("trace"));
}

TEST(Cli, InfeasibleThetaIsRefusal) {
  const auto dir = scratch("refusal");
  const auto r = run({"experiment", "--config", (kData / "infeasible.json").string(), "--out", dir.string()});
  EXPECT_EQ(r.code, kExitRefusal);
  EXPECT_NE(r.code, kExitViolation);
  const std::string csv = slurp(dir / "summary.csv");
  EXPECT_NE(csv.find(",refused\n"), std::string::npos);
  EXPECT_NE(csv.find(",pass\n"), std::string::npos);
}

TEST(Cli, ExitCodeMapping) {
  EXPECT_EQ(exit_code_for(hwt::Verdict::pass), 0);
  EXPECT_EQ(exit_code_for(hwt::Verdict::violation), 2);
  EXPECT_EQ(exit_code_for(hwt::Verdict::refused), 3);
}

TEST(Cli, ConfigErrors) {
  EXPECT_EQ(run({"experiment", "--config", (kData / "unknown_key.json").string()}).code, kExitConfigError);
  EXPECT_EQ(run({"experiment", "--config", (kData / "missing.json").string()}).code, kExitConfigError);
  EXPECT_EQ(run({"experiment"}).code, kExitConfigError);
  EXPECT_EQ(run({"nonsense"}).code, kExitConfigError);
  EXPECT_EQ(run({"experiment", "--config", (kData / "small.json").string(), "--threads", "0"}).code,
            kExitConfigError);
}

TEST(Cli, ThreadsDoNotChangeReports) {
  const auto a = scratch("t1");
  const auto b = scratch("t3");
  const auto cfg = (kData / "small.json").string();
  ASSERT_EQ(run({"experiment", "--config", cfg, "--out", a.string(), "--threads", "1"}).code, 0);
  ASSERT_EQ(run({"experiment", "--config", cfg, "--out", b.string(), "--threads", "3"}).code, 0);
  EXPECT_EQ(slurp(a / "report.json"), slurp(b / "report.json"));
  EXPECT_EQ(slurp(a / "summary.csv"), slurp(b / "summary.csv"));
}

TEST(Cli, SeedOverrideChangesTailsNotPinnedBounds) {
  const auto a = scratch("s1");
  const auto b = scratch("s2");
  const auto cfg = (kData / "pinned_pilot.json").string();
  ASSERT_EQ(run({"experiment", "--config", cfg, "--out", a.string(), "--seed", "1"}).code, 0);
  ASSERT_EQ(run({"experiment", "--config", cfg, "--out", b.string(), "--seed", "2"}).code, 0);
  const auto ja = nlohmann::json::parse(slurp(a / "report.json"));
  const auto jb = nlohmann::json::parse(slurp(b / "report.json"));
  bool tail_differs = false;
  for (std::size_t g = 0; g < ja.at("rows").size(); ++g) {
    EXPECT_EQ(ja["rows"][g]["bound"]["value"], jb["rows"][g]["bound"]["value"]);
    tail_differs = tail_differs || ja["rows"][g]["tail"]["p_hat"] != jb["rows"][g]["tail"]["p_hat"];
  }
  EXPECT_TRUE(tail_differs);
}

TEST(Cli, BoundCommandHasNoTailColumns) {
  const auto dir = scratch("bound");
  const auto r = run({"bound", "--config", (kData / "small.json").string(), "--out", dir.string()});
  EXPECT_EQ(r.code, kExitPass);
  std::ifstream is(dir / "summary.csv");
  std::string line;
  std::getline(is, line);
  std::getline(is, line);
  EXPECT_EQ(line.substr(line.find(','), 4), ",,,,");
  EXPECT_EQ(line.substr(line.rfind(',') + 1), "bound_only");
}

TEST(Cli, DecoupleWritesReport) {
  const auto dir = scratch("decouple");
  const auto r = run({"decouple", "--config", (kData / "decouple.json").string(), "--out", dir.string()});
  EXPECT_EQ(r.code, kExitPass) << r.out << r.err;
  const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(j.at("report"), "decoupling");
  EXPECT_GE(j.at("D_hat").get<double>(), 1.0);
  EXPECT_EQ(run({"decouple", "--config", (kData / "small.json").string(), "--out", dir.string()}).code,
            kExitConfigError);
}

TEST(Cli, SelftestDigestRepeatable) {
  const auto a = run({"selftest", "--seed", "3"});
  const auto b = run({"selftest", "--seed", "3"});
  EXPECT_EQ(a.code, kExitPass) << a.out;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("digest "), std::string::npos);
  EXPECT_NE(a.out.find("ok tensor."), std::string::npos);
}

TEST(Cli, SelftestFixtures) {
  EXPECT_EQ(run({"selftest", "--fixture", (kData / "identity_fixture.txt").string()}).code, kExitPass);
  const auto bad = run({"selftest", "--fixture", (kData / "corrupt_fixture.txt").string()});
  EXPECT_NE(bad.code, 0);
  EXPECT_NE(bad.err.find("fixture"), std::string::npos);
}

TEST(Cli, FormatDouble) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(format_double(std::nan("")), "");
}
