#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "support.hpp"

namespace reviewchain {
namespace {

namespace fs = std::filesystem;
using testing::read_text;
using testing::scenario_path;

struct Cli : ::testing::Test {
  fs::path dir;
  std::string out, err;

  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("reviewchain-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), {"--out", dir.string()});
    std::ostringstream o, e;
    int rc = cli::run_cli(args, o, e);
    out = o.str();
    err = e.str();
    return rc;
  }
  void write(const std::string& name, const std::string& text) {
    std::ofstream(dir / name, std::ios::binary) << text;
  }
};

TEST_F(Cli, InitThenVerifyAndExport) {
  ASSERT_EQ(run({"init"}), cli::kOk) << err;
  EXPECT_EQ(run({"verify"}), cli::kOk) << err;
  ASSERT_EQ(run({"export", "nodelink"}), cli::kOk);
  EXPECT_NE(out.find("\"links\": []"), std::string::npos);
  EXPECT_EQ(out, read_text((dir / "graph.json").string()));
  ASSERT_EQ(run({"export", "dot"}), cli::kOk);
  EXPECT_EQ(out, read_text((dir / "graph.dot").string()));
}

TEST_F(Cli, RunWritesEveryArtifact) {
  ASSERT_EQ(run({"run", scenario_path("two-papers.scn")}), cli::kOk) << err;
  for (const char* f : {"ledger.txt", "accounts.txt", "names.txt", "graph.json", "graph.dot",
                        "audit.log", "report.txt"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  EXPECT_NE(out.find("steps=29"), std::string::npos) << out;
  EXPECT_EQ(run({"verify"}), cli::kOk) << err;
}

TEST_F(Cli, BalanceMatchesTheReport) {
  ASSERT_EQ(run({"run", scenario_path("two-papers.scn")}), cli::kOk) << err;
  const auto report = read_text((dir / "report.txt").string());
  for (const char* user : {"alice", "bob", "carol", "dave", "erin"}) {
    ASSERT_EQ(run({"balance", user}), cli::kOk) << err;
    std::string key = std::string("balance.") + user + ".spendable=";
    auto pos = report.find(key);
    ASSERT_NE(pos, std::string::npos);
    auto value = report.substr(pos + key.size(), report.find('\n', pos) - pos - key.size());
    EXPECT_NE(out.find("spendable=" + value + " "), std::string::npos) << out;
  }
  EXPECT_EQ(run({"balance", "nobody"}), cli::kFailed);
  EXPECT_NE(err.find("category=UnknownEntity"), std::string::npos);
}

TEST_F(Cli, ShowPrintsAManuscript) {
  ASSERT_EQ(run({"run", scenario_path("two-papers.scn")}), cli::kOk) << err;
  ASSERT_EQ(run({"show", "m1"}), cli::kOk) << err;
  EXPECT_NE(out.find("state=confirmed"), std::string::npos);
  EXPECT_NE(out.find("confirmations=2"), std::string::npos);
  ASSERT_EQ(run({"show", "genesis"}), cli::kOk);
  EXPECT_NE(out.find("genesis=yes"), std::string::npos);
  EXPECT_EQ(run({"show", "m9"}), cli::kFailed);
}

TEST_F(Cli, TamperedLedgerFailsVerification) {
  ASSERT_EQ(run({"run", scenario_path("two-papers.scn")}), cli::kOk) << err;
  auto ledger = read_text((dir / "ledger.txt").string());
  // Bump the amount field of the last transaction by rewriting a digit.
  auto last = ledger.rfind('\n', ledger.size() - 2) + 1;
  auto line = ledger.substr(last);
  std::istringstream fields(line);
  std::vector<std::string> f;
  for (std::string s; fields >> s;) f.push_back(s);
  ASSERT_GT(f.size(), 5u);
  auto pos = ledger.find(' ' + f[5] + ' ', last);
  ASSERT_NE(pos, std::string::npos);
  ledger[pos + 1] = ledger[pos + 1] == '9' ? '8' : static_cast<char>(ledger[pos + 1] + 1);
  write("ledger.txt", ledger);
  EXPECT_EQ(run({"verify"}), cli::kViolations);
  EXPECT_NE(err.find("violation: "), std::string::npos) << err;
}

TEST_F(Cli, UsageErrorsAndUnknownFormat) {
  EXPECT_EQ(run({}), cli::kUsage);
  EXPECT_EQ(run({"fly"}), cli::kUsage);
  ASSERT_EQ(run({"init"}), cli::kOk);
  EXPECT_EQ(run({"export", "yaml"}), cli::kFailed);
  EXPECT_NE(err.find("category=UnknownFormat"), std::string::npos);
}

TEST_F(Cli, ScriptErrorsReportTheirCategory) {
  fs::create_directories(dir);
  write("bad.scn", "create-user a\nreview m1 a confirm\n");
  EXPECT_EQ(run({"run", (dir / "bad.scn").string()}), cli::kFailed);
  EXPECT_NE(err.find("category=ParseError"), std::string::npos);
  EXPECT_NE(err.find("line 2"), std::string::npos);
}

TEST_F(Cli, PolicyFileOverridesTheScript) {
  fs::create_directories(dir);
  write("policy.txt", "K=2\nrefund=1\n");
  ASSERT_EQ(run({"--policy", (dir / "policy.txt").string(), "run", scenario_path("two-papers.scn")}),
            cli::kOk)
      << err;
  EXPECT_NE(read_text((dir / "report.txt").string()).find("policy.refund=1\n"), std::string::npos);
}

}  // namespace
}  // namespace reviewchain
