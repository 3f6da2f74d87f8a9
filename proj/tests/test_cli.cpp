#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include <nrl/inequality_checks.hpp>
#include <nrl/run_store.hpp>
#include <nrl/scan_driver.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("nrl_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the binary with `args`; `env` is prepended verbatim (e.g. "NRL_OUT_DIR=x").
  CliRun cli(const std::string& args, const std::string& env = "") {
    const fs::path so = dir_ / "stdout.txt", se = dir_ / "stderr.txt";
    const std::string cmd = env + (env.empty() ? "" : " ") + "\"" NRL_CLI_PATH "\" " + args + " >\"" + so.string() +
                            "\" 2>\"" + se.string() + "\"";
    const int st = std::system(cmd.c_str());
    CliRun r;
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    r.out = slurp(so);
    r.err = slurp(se);
    return r;
  }

  std::string out_flag(const fs::path& p) const { return "--out \"" + p.string() + "\" "; }
  std::string out_flag() const { return out_flag(dir_ / "out"); }
  fs::path out(const std::string& f) const { return dir_ / "out" / f; }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  static std::size_t lines(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string l; std::getline(in, l);) ++n;
    return n;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, NicolasSmallRange) {
  const auto r = cli(out_flag() + "nicolas 1 100");
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_EQ(lines(out("nicolas-1-100.rows.csv")), 101u);
  const auto s = json::parse(slurp(out("nicolas-1-100.summary.json")));
  EXPECT_EQ(s["total"], 100);
  EXPECT_EQ(s["fails"], 0);
  EXPECT_TRUE(s["completed"].get<bool>());
}

TEST_F(CliTest, NicolasSingleRowMatchesLibrary) {
  const auto r = cli(out_flag() + "nicolas 5 5");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = nrl::read_rows(out("nicolas-5-5.rows.csv"), nrl::RowFormat::CSV);
  ASSERT_EQ(rows.size(), 1u);
  const auto v = nrl::nicolas_check(5);
  EXPECT_EQ(rows[0].subject, 5u);
  EXPECT_EQ(rows[0].lhs_log, nrl::format_decimal(v.lhs_log.value));
  EXPECT_EQ(rows[0].rhs_log, nrl::format_decimal(v.rhs_log.value));
  EXPECT_EQ(rows[0].margin, nrl::format_decimal(v.margin.value));
  EXPECT_EQ(rows[0].status, "HOLDS");
}

TEST_F(CliTest, JsonlRows) {
  ASSERT_EQ(cli(out_flag() + "--format jsonl nicolas 1 10").code, 0);
  EXPECT_EQ(nrl::read_rows(out("nicolas-1-10.rows.jsonl"), nrl::RowFormat::JSONL).size(), 10u);
}

TEST_F(CliTest, EmptyNicolasRangeIsUsageError) {
  const auto r = cli(out_flag() + "nicolas 1 0");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("k_lo"), std::string::npos) << r.err;
}

TEST_F(CliTest, EmptyRobinRangeIsUsageError) {
  const auto r = cli(out_flag() + "robin 2 2");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("hi"), std::string::npos) << r.err;
}

TEST_F(CliTest, BadStrideNamesField) {
  const auto r = cli(out_flag() + "nicolas 1 10 --stride geometric:0.5");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("stride"), std::string::npos) << r.err;
}

TEST_F(CliTest, BadConfigFile) {
  const fs::path cfg = dir_ / "bad.ini";
  std::ofstream(cfg) << "precision = sloppy\n";
  const auto r = cli("--config \"" + cfg.string() + "\" " + out_flag() + "nicolas 1 10");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("precision"), std::string::npos) << r.err;

  const fs::path cfg2 = dir_ / "extra.ini";
  std::ofstream(cfg2) << "no_such_key = 1\n";
  EXPECT_EQ(cli("--config \"" + cfg2.string() + "\" " + out_flag() + "nicolas 1 10").code, 3);
}

TEST_F(CliTest, ConfigFileValuesApply) {
  const fs::path cfg = dir_ / "ok.ini";
  std::ofstream(cfg) << "format = jsonl\nno-timestamps = true\n";
  ASSERT_EQ(cli("--config \"" + cfg.string() + "\" " + out_flag() + "nicolas 1 10").code, 0);
  EXPECT_TRUE(fs::exists(out("nicolas-1-10.rows.jsonl")));
  EXPECT_FALSE(json::parse(slurp(out("nicolas-1-10.summary.json"))).contains("wall_time_s"));
}

TEST_F(CliTest, RobinAboveExceptions) {
  const auto r = cli(out_flag() + "robin 5041 5042");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(json::parse(slurp(out("robin-5041-5042.summary.json")))["fails"], 0);
}

TEST_F(CliTest, RobinExpectedSmallExceptions) {
  EXPECT_EQ(cli(out_flag() + "robin 2 100000 --expect-small-exceptions").code, 0);
  const auto s = json::parse(slurp(out("robin-2-100000.summary.json")));
  EXPECT_EQ(s["fails"], 26);
  EXPECT_EQ(s["undefined_rhs"], 1);
  for (const auto& f : s["failures"]) EXPECT_LE(f["subject"].get<std::uint64_t>(), 5040u);
  EXPECT_EQ(cli(out_flag() + "robin 2 100000").code, 1);
}

TEST_F(CliTest, AuditReport) {
  const auto r = cli(out_flag() + "--no-timestamps audit --track proof --kmax 1000");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto a = json::parse(slurp(out("audit.json")));
  ASSERT_EQ(a["recurrence"].size(), 1u);
  const auto& coefficients = a["recurrence"][0]["coefficients"];
  ASSERT_EQ(coefficients.size(), 3u);
  EXPECT_EQ(coefficients[2]["recomputed"], "-w^2 + 3*w - 5");
  ASSERT_TRUE(a.contains("confrontation"));
  EXPECT_EQ(a["confrontation"]["k_max"], 1000);
  EXPECT_EQ(a["confrontation"]["scan"]["total"], 1000);
  EXPECT_EQ(a["confrontation"]["scan"]["fails"], 0);
  for (const char* key : {"loglog_shift_variants", "identity_checks", "cd_fit", "notes"}) EXPECT_TRUE(a.contains(key)) << key;
}

TEST_F(CliTest, AuditTracksDiffer) {
  ASSERT_EQ(cli(out_flag(dir_ / "d") + "audit --track displayed --kmax 50").code, 0);
  ASSERT_EQ(cli(out_flag(dir_ / "c") + "audit --track consistent --kmax 50").code, 0);
  const auto d = json::parse(slurp(dir_ / "d" / "audit.json"));
  const auto c = json::parse(slurp(dir_ / "c" / "audit.json"));
  EXPECT_NE(d["recurrence"].dump(), c["recurrence"].dump());
  EXPECT_EQ(d["confrontation"]["track"], "displayed");
  EXPECT_EQ(c["confrontation"]["track"], "consistent");
}

TEST_F(CliTest, AuditBadGrid) {
  const auto r = cli(out_flag() + "audit --cd-maxima 1e4:2e4");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("cd-maxima"), std::string::npos) << r.err;
}

TEST_F(CliTest, Constants) {
  const auto r = cli("constants");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("gamma = 0.5772156649015328606065120900824024310421"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("exp_gamma = 1.7810724179901979852365041031071795491696"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("mertens = 0.2614972128476427837554268386086958590515"), std::string::npos) << r.out;
}

TEST_F(CliTest, FitTables) {
  const auto r = cli(out_flag() + "fit --grid 1e3:1e5:geometric:12");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(out("fit_samples.csv")), 13u);
  EXPECT_EQ(lines(out("fit.csv")), 4u);
  EXPECT_EQ(cli(out_flag() + "fit --grid 1e3:1e4:geometric:4").code, 3);
}

TEST_F(CliTest, ProbeTable) {
  const auto r = cli(out_flag() + "probe --s 2 --grid 1:1e5:decade:2");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_GE(lines(out("probe_s2.csv")), 6u);
  EXPECT_EQ(cli(out_flag() + "probe --s 4").code, 3);
}

TEST_F(CliTest, NoTimestampsIsReproducible) {
  ASSERT_EQ(cli(out_flag(dir_ / "a") + "--no-timestamps --workers 1 robin 2 20000").code, 1);
  ASSERT_EQ(cli(out_flag(dir_ / "b") + "--no-timestamps --workers 1 robin 2 20000").code, 1);
  for (const char* f : {"robin-2-20000.rows.csv", "robin-2-20000.summary.json"})
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
}

TEST_F(CliTest, OutDirFromEnvironment) {
  const fs::path env_dir = dir_ / "env";
  ASSERT_EQ(cli("nicolas 1 3", "NRL_OUT_DIR=\"" + env_dir.string() + "\"").code, 0);
  EXPECT_TRUE(fs::exists(env_dir / "nicolas-1-3.rows.csv"));
}

TEST_F(CliTest, ResumeCompletesInterruptedScan) {
  ASSERT_EQ(cli(out_flag(dir_ / "cold") + "--no-timestamps --workers 1 --checkpoint-every 100 nicolas 1 2000").code, 0);

  // Interrupt an identically configured in-process scan, then finish it from the CLI.
  nrl::ScanJob job;
  job.scan_id = "nicolas-1-2000";
  job.kind = nrl::ScanKind::NICOLAS;
  job.lo = 1;
  job.hi = 2000;
  job.out_dir = dir_ / "warm";
  job.checkpoint_every = 100;
  job.checkpoint_seconds = 30;
  job.timestamps = false;
  job.sieve.workers = job.arith.workers = 1;
  job.sieve.ceiling = std::uint64_t{1} << 40;
  job.arith.range_ceiling = 1'000'000'000;
  nrl::RunHooks hooks;
  hooks.interrupt_before = [](std::uint64_t k) { return k == 1234; };
  EXPECT_THROW(nrl::run_scan(job, hooks), nrl::ScanInterrupted);

  const auto r = cli(out_flag(dir_ / "warm") + "resume nicolas-1-2000");
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"nicolas-1-2000.rows.csv", "nicolas-1-2000.summary.json"})
    EXPECT_EQ(slurp(dir_ / "cold" / f), slurp(dir_ / "warm" / f)) << f;

  EXPECT_EQ(cli(out_flag(dir_ / "warm") + "resume no-such-scan").code, 4);
}

TEST_F(CliTest, UnknownSubcommand) { EXPECT_EQ(cli("frobnicate").code, 3); }
