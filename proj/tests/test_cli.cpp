#include <gtest/gtest.h>
#include <nlohmann/json.hpp>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "nga/game.hpp"
#include "nga/prover_tools.hpp"

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run(const std::string& args) {
  const std::string cmd = std::string(NGA_CLI_PATH) + " " + args + " 2>&1";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof(buf), pipe)) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("nga_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
    write("chsh.json", nga::game_to_json(nga::chsh_game()).dump());
    std::ostringstream s;
    nga::write_strategy(s, fixture::chsh_qubit_strategy());
    write("chsh.strategy", s.str());
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }
  std::string read(const std::string& name) const {
    std::ifstream in(path(name));
    return {std::istreambuf_iterator<char>(in), {}};
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, ParamsPrintsDerivedValues) {
  const CliRun r = run("params --s 2 --t 2 --m 2 --rho 0.75 --epsilon 0.1");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("0.0003125"), std::string::npos);
  EXPECT_NE(r.out.find("5.425347222e-11"), std::string::npos);
  const CliRun j = run("params --s 2 --t 2 --m 2 --rho 0.75 --epsilon 0.1 --format json");
  const auto doc = nlohmann::json::parse(j.out);
  EXPECT_EQ(doc["schema"], "1");
  EXPECT_DOUBLE_EQ(doc["eps_prime"].get<double>(), 3.125e-4);
  EXPECT_TRUE(doc["D"].is_null());
  EXPECT_GT(doc["log10_D"].get<double>(), 100.0);
}

TEST_F(Cli, PsdTestOnIdentityAccepts) {
  write("id.op", "2 2 gell-mann\n0,0 : 1\n");
  const CliRun r = run("psd-test --op " + path("id.op") + " --format json");
  EXPECT_EQ(r.code, 0);
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_TRUE(doc["accept"].get<bool>());
  EXPECT_EQ(doc["estimate"].get<double>(), 0.0);
  write("neg.op", "2 1 gell-mann\n0 : -0.8\n");
  EXPECT_EQ(run("psd-test --op " + path("neg.op")).code, 1);
}

TEST_F(Cli, ProveThenVerifyAccepts) {
  const CliRun p = run("prove --game " + path("chsh.json") + " --strategy " + path("chsh.strategy") +
                    " --mes depolarized:m=2,eps=0.25 --delta 0.05 --width 20 --out " + path("chsh.cert") +
                    " --format json");
  ASSERT_EQ(p.code, 0) << p.out;
  const auto doc = nlohmann::json::parse(p.out);
  const double value = doc["strategy_value"].get<double>();
  char beta[32];
  std::snprintf(beta, sizeof(beta), "%.12f", value - 0.05);
  const std::string args = "verify --game " + path("chsh.json") + " --cert " + path("chsh.cert") +
                           " --mes depolarized:m=2,eps=0.25 --beta " + beta + " --format json";
  const CliRun v = run(args);
  EXPECT_EQ(v.code, 0) << v.out;
  EXPECT_TRUE(nlohmann::json::parse(v.out)["accept"].get<bool>());
  EXPECT_EQ(run(args).out, v.out);  // byte-identical reruns
}

TEST_F(Cli, UniformStrategyGivesConstantRows) {
  std::ostringstream s;
  nga::write_strategy(s, fixture::uniform_strategy(2, 1, 2, 2, 2, 2));
  write("uniform.strategy", s.str());
  const CliRun p = run("prove --game " + path("chsh.json") + " --strategy " + path("uniform.strategy") +
                    " --mes depolarized:m=2,eps=0.25 --out " + path("u.cert"));
  ASSERT_EQ(p.code, 0) << p.out;
  std::istringstream in(read("u.cert"));
  const nga::Certificate c = nga::read_certificate(in);
  for (nga::Party side : {nga::Party::alice, nga::Party::bob})
    for (const auto& [k, v] : c.table(side)) EXPECT_EQ(std::get<2>(k), 0u);
}

TEST_F(Cli, IdentityViolationRejectsWithListing) {
  write("bad.cert", "2 1 0 4\nA 0 0 0 8\nA 0 1 0 9\nA 1 0 0 8\nA 1 1 0 8\nB 0 0 0 8\nB 0 1 0 8\nB 1 0 0 8\nB 1 1 0 8\n");
  const CliRun r = run("verify --game " + path("chsh.json") + " --cert " + path("bad.cert") +
                    " --mes depolarized:m=2,eps=0.25 --beta 0.4");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("A question 0 sigma 0: numerators sum to 17"), std::string::npos) << r.out;
}

TEST_F(Cli, MalformedInputsExitTwo) {
  write("trunc.cert", "2 1 0\n");
  EXPECT_EQ(run("verify --game " + path("chsh.json") + " --cert " + path("trunc.cert") +
                " --mes depolarized:m=2,eps=0.25 --beta 0.4")
                .code,
            2);
  write("trunc.json", "{\"s_x\": 2,");
  write("ok.cert", "2 1 0 4\nA 0 0 0 16\n");
  const CliRun g = run("verify --game " + path("trunc.json") + " --cert " + path("ok.cert") +
                    " --mes depolarized:m=2,eps=0.25 --beta 0.4");
  EXPECT_EQ(g.code, 2);
  write("line.cert", "2 1 0 4\nA 0 0 0 16\nA 0 1 x 0\n");
  const CliRun l = run("verify --game " + path("chsh.json") + " --cert " + path("line.cert") +
                    " --mes depolarized:m=2,eps=0.25 --beta 0.4");
  EXPECT_EQ(l.code, 2);
  EXPECT_NE(l.out.find("line 3"), std::string::npos) << l.out;
  write("notpovm.strategy", "2 1\nA 0 0\n1 0\n0 1\nA 0 1\n1 0\n0 1\nB 0 0\n1 0\n0 1\n");
  EXPECT_EQ(run("prove --game " + path("chsh.json") + " --strategy " + path("notpovm.strategy") +
                " --mes depolarized:m=2,eps=0.25 --out " + path("x.cert"))
                .code,
            2);
  EXPECT_EQ(run("verify --game " + path("chsh.json")).code, 2);
  EXPECT_EQ(run("bogus").code, 2);
  EXPECT_EQ(run("verify --game " + path("chsh.json") + " --cert " + path("ok.cert") +
                " --mes depolarized:m=2,eps=0 --beta 0.4")
                .code,
            2);
}

TEST_F(Cli, SelftestSuites) {
  const CliRun r = run("selftest hyper --trials 50 --seed 4 --format json");
  EXPECT_EQ(r.code, 0) << r.out;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_TRUE(doc["passed"].get<bool>());
  EXPECT_EQ(doc["suites"][0]["suite"], "hyper");
  EXPECT_EQ(run("selftest derand --trials 2").code, 0);
  EXPECT_EQ(run("selftest nonsense").code, 2);
}
