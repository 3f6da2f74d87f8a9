#include <gtest/gtest.h>

#include <unistd.h>

#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include <nrl/scan_driver.hpp>

namespace fs = std::filesystem;
using nrl::ResultRow;
using nrl::RowFormat;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("nrl_store_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

std::vector<ResultRow> sample_rows() {
  return {{"scan-a", 1, "0.6931471805599453", "-0.369", "1.06", "1e-15", "HOLDS"},
          {"scan-a", 2, "1.0986", "0.2", "0.8", "2.5e-16", "FAILS"}};
}

}  // namespace

TEST(Decimal, RoundTripsRandomDoubles) {
  std::mt19937_64 rng(8080);
  for (int i = 0; i < 100'000; ++i) {
    double x;
    std::uint64_t bits = rng();
    std::memcpy(&x, &bits, sizeof x);
    if (!std::isfinite(x)) continue;
    const auto s = nrl::format_decimal(x);
    const double y = nrl::parse_decimal<double>(s);
    ASSERT_EQ(std::memcmp(&x, &y, sizeof x), 0) << s;
  }
  for (double x : {0.0, -0.0, 1e-320, 5e-324, 1.7976931348623157e308}) {
    const double y = nrl::parse_decimal<double>(nrl::format_decimal(x));
    EXPECT_EQ(std::memcmp(&x, &y, sizeof x), 0);
  }
  EXPECT_EQ(nrl::format_decimal(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_TRUE(std::isinf(nrl::parse_decimal<double>("inf")));
  EXPECT_THROW(nrl::parse_decimal<double>("1.5x"), nrl::StoreError);
  EXPECT_THROW(nrl::parse_u64("-3"), nrl::StoreError);
}

TEST(Decimal, LongDoubleRoundTrip) {
  std::mt19937_64 rng(8081);
  std::uniform_real_distribution<long double> d(-1e6L, 1e6L);
  for (int i = 0; i < 10'000; ++i) {
    const long double x = d(rng) / 3;
    ASSERT_EQ(nrl::parse_decimal<long double>(nrl::format_decimal(x)), x);
  }
}

TEST(Csv, QuotingRoundTrips) {
  const ResultRow tricky{"id,with \"quotes\"\nand newline", 7, "1", "2", "3", "4", "HOLDS"};
  const auto dir = fresh_dir("csvq");
  nrl::emit_rows({tricky}, RowFormat::CSV, dir / "r.csv");
  const auto text = slurp(dir / "r.csv");
  EXPECT_NE(text.find("\"id,with \"\"quotes\"\"\nand newline\""), std::string::npos);
  const auto back = nrl::read_rows(dir / "r.csv", RowFormat::CSV);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], tricky);
  fs::remove_all(dir);
}

TEST(EmitRows, EmptyStreamWritesHeaderOnly) {
  const auto dir = fresh_dir("empty");
  nrl::emit_rows({}, RowFormat::CSV, dir / "e.csv");
  EXPECT_EQ(slurp(dir / "e.csv"), "scan_id,subject,lhs_log,rhs_log,margin,radius,status\n");
  nrl::emit_rows({}, RowFormat::JSONL, dir / "e.jsonl");
  EXPECT_EQ(count_lines(slurp(dir / "e.jsonl")), 1u);
  EXPECT_TRUE(nrl::read_rows(dir / "e.csv", RowFormat::CSV).empty());
  EXPECT_TRUE(nrl::read_rows(dir / "e.jsonl", RowFormat::JSONL).empty());
  fs::remove_all(dir);
}

TEST(EmitRows, TwoRowsInSubjectOrder) {
  const auto dir = fresh_dir("two");
  nrl::emit_rows(sample_rows(), RowFormat::CSV, dir / "t.csv");
  const auto text = slurp(dir / "t.csv");
  EXPECT_EQ(count_lines(text), 3u);
  EXPECT_LT(text.find("scan-a,1,"), text.find("scan-a,2,"));
  nrl::emit_rows(sample_rows(), RowFormat::JSONL, dir / "t.jsonl");
  const auto jl = slurp(dir / "t.jsonl");
  EXPECT_EQ(count_lines(jl), 3u);
  // Stable key order in every line.
  EXPECT_NE(jl.find("{\"scan_id\":\"scan-a\",\"subject\":1,\"lhs_log\""), std::string::npos);
  fs::remove_all(dir);
}

TEST(EmitRows, CsvAndJsonlParseBackIdentically) {
  std::mt19937_64 rng(3);
  std::vector<ResultRow> rows;
  for (std::uint64_t i = 1; i <= 500; ++i) {
    std::uniform_real_distribution<double> d(-5, 5);
    rows.push_back({"mixed", i, nrl::format_decimal(d(rng)), nrl::format_decimal(d(rng)), nrl::format_decimal(d(rng)),
                    nrl::format_decimal(std::ldexp(1.0, -50)), i % 7 ? "HOLDS" : "FAILS"});
  }
  const auto dir = fresh_dir("both");
  nrl::emit_rows(rows, RowFormat::CSV, dir / "a.csv");
  nrl::emit_rows(rows, RowFormat::JSONL, dir / "a.jsonl");
  const auto c = nrl::read_rows(dir / "a.csv", RowFormat::CSV);
  const auto j = nrl::read_rows(dir / "a.jsonl", RowFormat::JSONL);
  EXPECT_EQ(c, rows);
  EXPECT_EQ(j, rows);
  fs::remove_all(dir);
}

TEST(EmitRows, RejectsWrongHeader) {
  const auto dir = fresh_dir("bad");
  std::ofstream(dir / "x.csv") << "a,b,c\n";
  EXPECT_THROW(nrl::read_rows(dir / "x.csv", RowFormat::CSV), nrl::StoreError);
  EXPECT_THROW(nrl::parse_row_format("xml"), nrl::ConfigError);
  fs::remove_all(dir);
}

TEST(RowWriter, TruncateToDropsTail) {
  const auto dir = fresh_dir("trunc");
  const auto p = dir / "r.csv";
  std::uint64_t mark;
  {
    nrl::RowWriter w(p, RowFormat::CSV);
    w.write(sample_rows()[0]);
    w.flush();
    mark = w.bytes_written();
    w.write(sample_rows()[1]);
    w.flush();
  }
  {
    nrl::RowWriter w(p, RowFormat::CSV, mark);
    w.write(sample_rows()[1]);
    w.flush();
  }
  EXPECT_EQ(nrl::read_rows(p, RowFormat::CSV), sample_rows());
  EXPECT_THROW(nrl::RowWriter(dir / "missing.csv", RowFormat::CSV, 0), nrl::StoreError);
  fs::remove_all(dir);
}

TEST(Checkpoint, WriteThenReadIsIdentical) {
  const auto dir = fresh_dir("ck");
  nrl::ScanCheckpoint c;
  c.scan_id = "nic";
  c.kind = nrl::ScanKind::CLM;
  c.cursor = 123456789012345ull;
  c.accumulator_state = {{"lhs", nrl::format_decimal(0.1 + 0.2)}, {"nested", {{"a", "1"}}}};
  c.params = {{"lo", "1"}, {"hi", "100"}};
  c.created_at = nrl::utc_timestamp();
  nrl::checkpoint_write(dir / "c.json", c);
  EXPECT_EQ(nrl::checkpoint_read(dir / "c.json"), c);
  EXPECT_FALSE(fs::exists(dir / "c.json.tmp"));
  fs::remove_all(dir);
}

TEST(Checkpoint, VersionMismatchIsExplicit) {
  const auto dir = fresh_dir("ver");
  nrl::ScanCheckpoint c;
  c.scan_id = "v";
  c.schema_version = nrl::kCheckpointSchemaVersion + 1;
  nrl::checkpoint_write(dir / "c.json", c);
  EXPECT_THROW(nrl::checkpoint_read(dir / "c.json"), nrl::CheckpointVersionError);
  std::ofstream(dir / "junk.json") << "{not json";
  EXPECT_THROW(nrl::checkpoint_read(dir / "junk.json"), nrl::StoreError);
  EXPECT_THROW(nrl::checkpoint_read(dir / "absent.json"), nrl::StoreError);
  fs::remove_all(dir);
}

TEST(Checkpoint, CrashBeforeRenameKeepsPreviousCheckpoint) {
  const auto dir = fresh_dir("crash");
  nrl::ScanCheckpoint first;
  first.scan_id = "s";
  first.cursor = 10;
  nrl::checkpoint_write(dir / "c.json", first);
  const auto before = slurp(dir / "c.json");

  nrl::ScanCheckpoint second = first;
  second.cursor = 20;
  struct Crash {};
  EXPECT_THROW(nrl::checkpoint_write(dir / "c.json", second, [](const fs::path&) { throw Crash{}; }), Crash);
  EXPECT_EQ(slurp(dir / "c.json"), before);
  EXPECT_EQ(nrl::checkpoint_read(dir / "c.json").cursor, 10u);

  // A torn temp file from the crash does not affect the next commit.
  nrl::checkpoint_write(dir / "c.json", second);
  EXPECT_EQ(nrl::checkpoint_read(dir / "c.json").cursor, 20u);
  fs::remove_all(dir);
}

// ---------------------------------------------------------------------------
// Resume determinism

namespace {

nrl::ScanJob make_job(nrl::ScanKind kind, const fs::path& dir, const std::string& id) {
  nrl::ScanJob j;
  j.scan_id = id;
  j.kind = kind;
  j.out_dir = dir;
  j.timestamps = false;
  j.checkpoint_every = 97;
  j.checkpoint_seconds = 1e9;
  if (kind == nrl::ScanKind::ROBIN) {
    j.lo = 2;
    j.hi = 3000;
  } else {
    j.lo = 1;
    j.hi = 2000;
  }
  return j;
}

struct Files {
  std::string rows, summary;
};

Files files(const nrl::ScanJob& j) { return {slurp(j.rows_path()), slurp(j.summary_path())}; }

}  // namespace

class ResumeDeterminism : public ::testing::TestWithParam<std::tuple<nrl::ScanKind, RowFormat>> {};

TEST_P(ResumeDeterminism, InterruptedRunsMatchColdRun) {
  const auto [kind, format] = GetParam();
  const auto dir = fresh_dir(std::string("resume_") + nrl::to_string(kind) + nrl::to_string(format));
  auto cold_job = make_job(kind, dir / "cold", "scan");
  cold_job.format = format;
  if (kind == nrl::ScanKind::CLM) cold_job.reading = nrl::ClmReading::SQUARE_OF_LOGLOG;
  nrl::run_scan(cold_job);
  const Files cold = files(cold_job);
  ASSERT_GT(count_lines(cold.rows), 1000u);

  for (std::uint64_t cut : {cold_job.lo + 1, (cold_job.lo + cold_job.hi) / 2 + 13, cold_job.hi - 1}) {
    auto job = cold_job;
    job.out_dir = dir / ("cut" + std::to_string(cut));
    nrl::RunHooks crash;
    crash.interrupt_before = [cut](std::uint64_t s) { return s == cut; };
    EXPECT_THROW(nrl::run_scan(job, crash), nrl::ScanInterrupted);
    EXPECT_FALSE(fs::exists(job.summary_path()));
    // Rows past the last checkpoint were flushed, as a dying process would leave them.
    const auto out = nrl::resume_scan(job.out_dir, job.scan_id);
    const Files got = files(job);
    EXPECT_EQ(got.rows, cold.rows) << "cut " << cut;
    EXPECT_EQ(got.summary, cold.summary) << "cut " << cut;
    EXPECT_EQ(out.tally.total, out.tally.holds + out.tally.fails + out.tally.indeterminate + out.tally.undefined);
  }
  fs::remove_all(dir);
}

INSTANTIATE_TEST_SUITE_P(Kinds, ResumeDeterminism,
                         ::testing::Values(std::make_tuple(nrl::ScanKind::NICOLAS, RowFormat::CSV),
                                           std::make_tuple(nrl::ScanKind::CLM, RowFormat::JSONL),
                                           std::make_tuple(nrl::ScanKind::ROBIN, RowFormat::CSV)),
                         [](const auto& info) {
                           return std::string(nrl::to_string(std::get<0>(info.param))) + "_" +
                                  nrl::to_string(std::get<1>(info.param));
                         });

TEST(ResumeDeterminism, CrashDuringCheckpointCommit) {
  const auto dir = fresh_dir("commitcrash");
  auto cold_job = make_job(nrl::ScanKind::NICOLAS, dir / "cold", "n");
  nrl::run_scan(cold_job);
  const Files cold = files(cold_job);

  auto job = cold_job;
  job.out_dir = dir / "crash";
  int commits = 0;
  struct Crash {};
  nrl::RunHooks hooks;
  hooks.checkpoint_commit = [&](const fs::path&) {
    if (++commits == 6) throw Crash{};
  };
  EXPECT_THROW(nrl::run_scan(job, hooks), Crash);
  EXPECT_NO_THROW(nrl::checkpoint_read(job.checkpoint_path()));
  nrl::resume_scan(job.out_dir, job.scan_id);
  EXPECT_EQ(files(job).rows, cold.rows);
  EXPECT_EQ(files(job).summary, cold.summary);
  fs::remove_all(dir);
}

TEST(ResumeDeterminism, RepeatedResumesAndFilteredRows) {
  const auto dir = fresh_dir("repeat");
  auto cold_job = make_job(nrl::ScanKind::ROBIN, dir / "cold", "r");
  cold_job.filter = nrl::RowFilter::NOT_HOLDS;
  nrl::run_scan(cold_job);
  const Files cold = files(cold_job);
  EXPECT_EQ(count_lines(cold.rows), 1u + 25u + 1u);  // header, 25 FAILS below 3000 (up to 2520), n = 2 UNDEFINED_RHS

  auto job = cold_job;
  job.out_dir = dir / "multi";
  nrl::RunHooks h1, h2;
  h1.interrupt_before = [](std::uint64_t n) { return n == 700; };
  h2.interrupt_before = [](std::uint64_t n) { return n == 2400; };
  EXPECT_THROW(nrl::run_scan(job, h1), nrl::ScanInterrupted);
  EXPECT_THROW(nrl::resume_scan(job.out_dir, job.scan_id, h2), nrl::ScanInterrupted);
  nrl::resume_scan(job.out_dir, job.scan_id);
  EXPECT_EQ(files(job).rows, cold.rows);
  EXPECT_EQ(files(job).summary, cold.summary);
  fs::remove_all(dir);
}

TEST(ScanJob, Validation) {
  auto j = make_job(nrl::ScanKind::NICOLAS, fresh_dir("val"), "");
  EXPECT_THROW(nrl::run_scan(j), nrl::ConfigError);
  j.scan_id = "a/b";
  EXPECT_THROW(nrl::run_scan(j), nrl::ConfigError);
  j.scan_id = "ok";
  j.checkpoint_every = 0;
  EXPECT_THROW(nrl::run_scan(j), nrl::ConfigError);
  EXPECT_THROW(nrl::resume_scan(j.out_dir, "nothing"), nrl::StoreError);
  EXPECT_THROW(nrl::parse_precision("double"), nrl::ConfigError);
  fs::remove_all(j.out_dir);
}
