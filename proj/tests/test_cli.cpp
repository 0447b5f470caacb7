#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  std::string cmd = std::string(CBSL_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
  int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("cbsl_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

const std::string kCoarse = " --ntheta 4 --nphi 8";

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("table --s0 -2").code, 1);
  EXPECT_EQ(run("table --channel diagonal").code, 1);
  EXPECT_EQ(run("table --s0 2 --kr 5").code, 1);
  EXPECT_EQ(run("spectrum --s0 2 --grid-n 10").code, 1);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, TableJson) {
  auto r = run("table --s0 2 --delta 0 --json" + kCoarse);
  ASSERT_EQ(r.code, 0);
  auto js = nlohmann::json::parse(r.out);
  ASSERT_EQ(js.size(), 1u);
  EXPECT_NEAR(js[0]["eta"].get<double>(), 1.576, 0.01);
  EXPECT_EQ(js[0]["L_el"], js[0]["C_el"]);
}

TEST(Cli, SmallKrOverride) { EXPECT_EQ(run("table --s0 2 --kr 5 --allow-small-kr" + kCoarse).code, 0); }

TEST(Cli, ConfigFileAndFlagPrecedence) {
  fs::path d = scratch("config");
  std::ofstream(d / "run.ini") << "s0=0.02\ndelta=0\nntheta=4\nnphi=8\njson=true\n";
  auto from_file = nlohmann::json::parse(run("table --config " + (d / "run.ini").string()).out);
  auto overridden = nlohmann::json::parse(run("table --s0 2 --config " + (d / "run.ini").string()).out);
  EXPECT_EQ(from_file[0]["s0"].get<double>(), 0.02);
  EXPECT_EQ(overridden[0]["s0"].get<double>(), 2.0);
}

TEST(Cli, SpectrumIsDeterministic) {
  fs::path a = scratch("spec_a"), b = scratch("spec_b");
  const std::string args = "spectrum --s0 2 --delta 0 --grid-n 21 --json" + kCoarse;
  ASSERT_EQ(run(args + " --out " + a.string()).code, 0);
  ASSERT_EQ(run(args + " --out " + b.string()).code, 0);
  const std::string stem = "spectrum_s0_2_delta_0";
  std::string csv = slurp(a / (stem + ".csv"));
  EXPECT_EQ(csv, slurp(b / (stem + ".csv")));
  EXPECT_EQ(slurp(a / (stem + ".json")), slurp(b / (stem + ".json")));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "delta,ladder_inelastic,crossed_inelastic");
  auto js = nlohmann::json::parse(slurp(a / (stem + ".json")));
  auto l = js["ladder_inelastic"].get<std::vector<double>>();
  ASSERT_EQ(l.size(), 21u);
  for (std::size_t k = 0; k < l.size(); ++k) EXPECT_NEAR(l[k], l[l.size() - 1 - k], 1e-8);
}

TEST(Cli, UnwritableOutput) {
  fs::path d = scratch("ro");
  std::ofstream(d / "file") << "x";
  EXPECT_EQ(run("spectrum --s0 2 --grid-n 5 --out " + (d / "file" / "sub").string() + kCoarse).code, 1);
}

TEST(Cli, MediumFileAndWarning) {
  fs::path d = scratch("medium");
  std::ofstream(d / "m.csv") << "delta,re,im\n-5,5,0\n5,5,0\n";
  auto r = run("table --s0 2 --json --medium " + (d / "m.csv").string() + kCoarse);
  ASSERT_EQ(r.code, 0);
  auto js = nlohmann::json::parse(r.out);
  EXPECT_EQ(js[0]["warnings"][0], "dilute condition violated");
  EXPECT_EQ(run("table --s0 2 --medium " + (d / "missing.csv").string()).code, 1);
}

TEST(Cli, ValidateCatchesInjectedFault) {
  auto r = run("validate --inject-fault");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.out.find("FAIL  OB vs Langevin"), std::string::npos);
  EXPECT_NE(r.out.find("PASS  algebra reconstruction"), std::string::npos);
}
