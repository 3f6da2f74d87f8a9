#pragma once

// Checkpointed Nicolas / CLM / Robin scans writing rows and a summary to an
// output directory. A resumed scan produces the same bytes as a cold one.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "inequality_checks.hpp"
#include "run_store.hpp"

namespace nrl {

class ScanInterrupted : public Error {
 public:
  using Error::Error;
};

enum class RowFilter { ALL, NOT_HOLDS };

struct ScanJob {
  std::string scan_id;
  ScanKind kind = ScanKind::NICOLAS;
  /// Nicolas / CLM: inclusive k range. Robin: n in [lo, hi).
  std::uint64_t lo = 1;
  std::uint64_t hi = 1;
  ClmReading reading = ClmReading::LOGLOG_OF_SQUARE;
  Precision precision = Precision::GUARDED;
  StridePolicy stride;
  RowFormat format = RowFormat::CSV;
  RowFilter filter = RowFilter::ALL;
  std::filesystem::path out_dir = ".";
  std::uint64_t checkpoint_every = 1'000'000;
  double checkpoint_seconds = 30;
  bool timestamps = true;
  SieveConfig sieve;
  ArithmeticConfig arith;

  std::filesystem::path rows_path() const {
    return out_dir / (scan_id + ".rows." + to_string(format));
  }
  std::filesystem::path checkpoint_path() const { return out_dir / (scan_id + ".checkpoint.json"); }
  std::filesystem::path summary_path() const { return out_dir / (scan_id + ".summary.json"); }
};

inline Precision parse_precision(const std::string& s) {
  for (auto p : {Precision::FAST64, Precision::GUARDED, Precision::HIGH})
    if (s == to_string(p)) return p;
  throw ConfigError("precision", "expected fast64, guarded or high, got '" + s + "'");
}

inline ClmReading parse_clm_reading(const std::string& s) {
  for (auto r : {ClmReading::LOGLOG_OF_SQUARE, ClmReading::SQUARE_OF_LOGLOG})
    if (s == to_string(r)) return r;
  throw ConfigError("reading", "unknown CLM reading '" + s + "'");
}

inline json job_params(const ScanJob& j) {
  return json{{"lo", format_u64(j.lo)},
              {"hi", format_u64(j.hi)},
              {"reading", to_string(j.reading)},
              {"precision", to_string(j.precision)},
              {"stride", j.stride.kind == StridePolicy::Kind::ALL ? "all" : "geometric"},
              {"stride_ratio", format_decimal(j.stride.ratio)},
              {"format", to_string(j.format)},
              {"filter", j.filter == RowFilter::ALL ? "all" : "not-holds"},
              {"checkpoint_every", format_u64(j.checkpoint_every)},
              {"checkpoint_seconds", format_decimal(j.checkpoint_seconds)},
              {"timestamps", j.timestamps},
              {"workers", j.sieve.workers},
              {"sieve_ceiling", format_u64(j.sieve.ceiling)},
              {"range_ceiling", format_u64(j.arith.range_ceiling)}};
}

inline ScanJob job_from_checkpoint(const ScanCheckpoint& c, const std::filesystem::path& out_dir) {
  const json& p = c.params;
  ScanJob j;
  j.scan_id = c.scan_id;
  j.kind = c.kind;
  j.out_dir = out_dir;
  j.lo = parse_u64(p.at("lo").get<std::string>());
  j.hi = parse_u64(p.at("hi").get<std::string>());
  j.reading = parse_clm_reading(p.at("reading").get<std::string>());
  j.precision = parse_precision(p.at("precision").get<std::string>());
  if (p.at("stride").get<std::string>() == "geometric")
    j.stride = StridePolicy::geometric(parse_decimal<double>(p.at("stride_ratio").get<std::string>()));
  j.format = parse_row_format(p.at("format").get<std::string>());
  j.filter = p.at("filter").get<std::string>() == "all" ? RowFilter::ALL : RowFilter::NOT_HOLDS;
  j.checkpoint_every = parse_u64(p.at("checkpoint_every").get<std::string>());
  j.checkpoint_seconds = parse_decimal<double>(p.at("checkpoint_seconds").get<std::string>());
  j.timestamps = p.at("timestamps").get<bool>();
  j.sieve.workers = j.arith.workers = p.at("workers").get<unsigned>();
  j.sieve.ceiling = parse_u64(p.at("sieve_ceiling").get<std::string>());
  j.arith.range_ceiling = parse_u64(p.at("range_ceiling").get<std::string>());
  return j;
}

inline ResultRow to_row(const std::string& scan_id, const CheckVerdict& v) {
  return {scan_id,
          v.subject,
          format_decimal(v.lhs_log.value),
          format_decimal(v.rhs_log.value),
          format_decimal(v.margin.value),
          format_decimal(v.margin.radius),
          to_string(v.status)};
}

inline json row_json(const ResultRow& r) {
  return json{{"subject", r.subject}, {"lhs_log", r.lhs_log}, {"rhs_log", r.rhs_log},
              {"margin", r.margin},   {"radius", r.radius},   {"status", r.status}};
}

inline ResultRow row_from_json(const std::string& scan_id, const json& j) {
  return {scan_id,
          j.at("subject").get<std::uint64_t>(),
          j.at("lhs_log").get<std::string>(),
          j.at("rhs_log").get<std::string>(),
          j.at("margin").get<std::string>(),
          j.at("radius").get<std::string>(),
          j.at("status").get<std::string>()};
}

/// Counts and failures carried across checkpoints.
struct ScanTally {
  std::uint64_t total = 0, holds = 0, fails = 0, indeterminate = 0, undefined = 0;
  std::vector<ResultRow> failures;
  std::vector<std::uint64_t> indeterminate_subjects;
  RobinCrossTab crosstab;

  void record(const CheckVerdict& v, const ResultRow& row) {
    ++total;
    switch (v.status) {
      case Status::HOLDS: ++holds; break;
      case Status::FAILS:
        ++fails;
        failures.push_back(row);
        break;
      case Status::INDETERMINATE:
        ++indeterminate;
        indeterminate_subjects.push_back(v.subject);
        break;
      case Status::UNDEFINED_RHS: ++undefined; break;
    }
  }

  json to_json(const std::string& /*scan_id*/) const {
    json f = json::array();
    for (const auto& r : failures) f.push_back(row_json(r));
    json ind = json::array();
    for (auto s : indeterminate_subjects) ind.push_back(s);
    json omega = json::object();
    for (const auto& [k, n] : crosstab.fails_by_omega) omega[std::to_string(k)] = n;
    return json{{"total", total},
                {"holds", holds},
                {"fails", fails},
                {"indeterminate", indeterminate},
                {"undefined_rhs", undefined},
                {"failures", f},
                {"indeterminate_subjects", ind},
                {"fails_by_omega", omega},
                {"fails_strict_hr", crosstab.fails_strict_hr},
                {"fails_weak_hr", crosstab.fails_weak_hr},
                {"fails_not_weak_hr", crosstab.fails_not_weak_hr}};
  }

  static ScanTally from_json(const std::string& scan_id, const json& j) {
    ScanTally t;
    t.total = j.at("total").get<std::uint64_t>();
    t.holds = j.at("holds").get<std::uint64_t>();
    t.fails = j.at("fails").get<std::uint64_t>();
    t.indeterminate = j.at("indeterminate").get<std::uint64_t>();
    t.undefined = j.at("undefined_rhs").get<std::uint64_t>();
    for (const auto& r : j.at("failures")) t.failures.push_back(row_from_json(scan_id, r));
    for (const auto& s : j.at("indeterminate_subjects")) t.indeterminate_subjects.push_back(s.get<std::uint64_t>());
    for (const auto& [k, n] : j.at("fails_by_omega").items()) t.crosstab.fails_by_omega[std::stoul(k)] = n.get<std::uint64_t>();
    t.crosstab.fails_strict_hr = j.at("fails_strict_hr").get<std::uint64_t>();
    t.crosstab.fails_weak_hr = j.at("fails_weak_hr").get<std::uint64_t>();
    t.crosstab.fails_not_weak_hr = j.at("fails_not_weak_hr").get<std::uint64_t>();
    return t;
  }
};

struct ScanOutcome {
  ScanJob job;
  ScanTally tally;
  double wall_time = 0;
  json summary;
};

struct RunHooks {
  /// Checked before each subject; returning true aborts the scan as if the
  /// process died there (no final checkpoint, no summary).
  std::function<bool(std::uint64_t subject)> interrupt_before;
  CommitHook checkpoint_commit;
};

namespace detail {

template <typename Real>
json sum_state_json(const typename CompensatedSum<Real>::State& s) {
  return json{{"sum", format_decimal(s.sum)},
              {"comp", format_decimal(s.comp)},
              {"abs_sum", format_decimal(s.abs_sum)},
              {"term_radius", format_decimal(s.term_radius)},
              {"terms", format_u64(s.terms)}};
}

template <typename Real>
CompensatedSum<Real> sum_from_json(const json& j) {
  typename CompensatedSum<Real>::State s;
  s.sum = parse_decimal<Real>(j.at("sum").get<std::string>());
  s.comp = parse_decimal<Real>(j.at("comp").get<std::string>());
  s.abs_sum = parse_decimal<Real>(j.at("abs_sum").get<std::string>());
  s.term_radius = parse_decimal<Real>(j.at("term_radius").get<std::string>());
  s.terms = parse_u64(j.at("terms").get<std::string>());
  return CompensatedSum<Real>::from_state(s);
}

/// Mutable run state plus the checkpoint cadence.
class ScanSession {
 public:
  ScanSession(const ScanJob& job, const RunHooks& hooks, std::optional<ScanCheckpoint> resume)
      : job_(job), hooks_(hooks) {
    std::filesystem::create_directories(job_.out_dir);
    if (resume) {
      tally_ = ScanTally::from_json(job_.scan_id, resume->accumulator_state.at("tally"));
      prior_wall_ = parse_decimal<double>(resume->accumulator_state.at("wall_time").get<std::string>());
      rows_.emplace(job_.rows_path(), job_.format,
                    parse_u64(resume->accumulator_state.at("rows_bytes").get<std::string>()));
    } else {
      rows_.emplace(job_.rows_path(), job_.format);
    }
    t0_ = last_ = std::chrono::steady_clock::now();
  }

  const ScanJob& job() const { return job_; }
  ScanTally& tally() { return tally_; }

  void before(std::uint64_t subject) {
    if (hooks_.interrupt_before && hooks_.interrupt_before(subject)) {
      rows_->flush();
      throw ScanInterrupted("scan interrupted before subject " + std::to_string(subject));
    }
  }

  void emit(const CheckVerdict& v) {
    const ResultRow row = to_row(job_.scan_id, v);
    tally_.record(v, row);
    if (v.status == Status::FAILS && job_.kind == ScanKind::ROBIN) tally_.crosstab.record_failure(v.subject, job_.arith);
    if (job_.filter == RowFilter::ALL || v.status != Status::HOLDS) rows_->write(row);
  }

  /// Called after each processed subject; writes a checkpoint when due.
  void tick(std::uint64_t processed, const std::function<json()>& state, std::uint64_t cursor) {
    since_ += processed;
    const auto now = std::chrono::steady_clock::now();
    if (since_ >= job_.checkpoint_every || std::chrono::duration<double>(now - last_).count() >= job_.checkpoint_seconds) {
      checkpoint(state(), cursor);
      since_ = 0;
      last_ = now;
    }
  }

  void checkpoint(json scan_state, std::uint64_t cursor) {
    rows_->flush();
    ScanCheckpoint c;
    c.scan_id = job_.scan_id;
    c.kind = job_.kind;
    c.cursor = cursor;
    c.params = job_params(job_);
    c.created_at = job_.timestamps ? utc_timestamp() : "";
    scan_state["tally"] = tally_.to_json(job_.scan_id);
    scan_state["rows_bytes"] = format_u64(rows_->bytes_written());
    scan_state["wall_time"] = format_decimal(wall());
    c.accumulator_state = std::move(scan_state);
    checkpoint_write(job_.checkpoint_path(), c, hooks_.checkpoint_commit);
  }

  double wall() const {
    return prior_wall_ + std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

  ScanOutcome finish(json scan_state, std::uint64_t cursor) {
    checkpoint(std::move(scan_state), cursor);
    ScanOutcome out;
    out.job = job_;
    out.tally = tally_;
    out.wall_time = wall();
    json s{{"scan_id", job_.scan_id}, {"kind", to_string(job_.kind)}, {"params", job_params(job_)}, {"completed", true}};
    s.update(tally_.to_json(job_.scan_id));
    if (job_.kind != ScanKind::ROBIN) {
      s.erase("fails_by_omega");
      s.erase("fails_strict_hr");
      s.erase("fails_weak_hr");
      s.erase("fails_not_weak_hr");
    }
    if (job_.timestamps) s["wall_time_s"] = out.wall_time;
    write_document(job_.summary_path(), s);
    out.summary = std::move(s);
    return out;
  }

 private:
  ScanJob job_;
  RunHooks hooks_;
  ScanTally tally_;
  std::optional<RowWriter> rows_;
  std::chrono::steady_clock::time_point t0_, last_;
  double prior_wall_ = 0;
  std::uint64_t since_ = 0;
};

template <typename Real>
ScanOutcome run_primorial(const ScanJob& job, const RunHooks& hooks, const std::optional<ScanCheckpoint>& resume) {
  if (job.lo < 1 || job.lo > job.hi) throw InvalidRange("scan: need 1 <= k_lo <= k_hi");
  const std::uint64_t bound = nth_prime_upper_bound(job.hi);
  if (bound > job.sieve.ceiling) throw RangeError("scan: k_hi=" + std::to_string(job.hi) + " exceeds prime ceiling");

  PrimorialState<Real> st;
  std::uint64_t next_emit = job.lo;
  if (resume) {
    const json& a = resume->accumulator_state;
    st.k = parse_u64(a.at("k").get<std::string>());
    st.last_prime = parse_u64(a.at("last_prime").get<std::string>());
    st.lhs = sum_from_json<Real>(a.at("lhs"));
    st.theta = sum_from_json<Real>(a.at("theta"));
    next_emit = parse_u64(a.at("next_emit").get<std::string>());
  }
  ScanSession session(job, hooks, resume);

  auto run = [&](auto scanner) {
    auto state = [&]() {
      const auto& s = scanner.state();
      return json{{"k", format_u64(s.k)},
                  {"last_prime", format_u64(s.last_prime)},
                  {"lhs", sum_state_json<Real>(s.lhs.state())},
                  {"theta", sum_state_json<Real>(s.theta.state())},
                  {"next_emit", format_u64(next_emit)}};
    };
    if (!resume) session.checkpoint(state(), scanner.state().k + 1);
    if (scanner.state().k < job.hi) {
      for_each_prime(scanner.state().last_prime + 1, bound, job.sieve, [&](std::uint64_t p) {
        const std::uint64_t k = scanner.state().k + 1;
        session.before(k);
        const CheckVerdict v = scanner.add_prime(p);
        if (k >= job.lo && (k == next_emit || k == job.hi)) {
          session.emit(v);
          next_emit = job.stride.next_after(k);
        }
        if (k < job.hi) session.tick(1, state, k + 1);
        return k < job.hi;
      });
    }
    return session.finish(state(), scanner.state().k + 1);
  };

  if (job.kind == ScanKind::NICOLAS) return run(NicolasScanner<Real>(job.precision, st));
  return run(ClmScanner<Real>(job.reading, job.precision, st));
}

inline ScanOutcome run_robin(const ScanJob& job, const RunHooks& hooks, const std::optional<ScanCheckpoint>& resume) {
  if (job.lo < 2 || job.lo >= job.hi) throw InvalidRange("robin: need 2 <= lo < hi (empty range)");
  if (job.hi > job.arith.range_ceiling + 1) throw RangeError("robin: hi exceeds range ceiling");
  std::uint64_t cursor = resume ? resume->cursor : job.lo;
  ScanSession session(job, hooks, resume);
  auto state = [] { return json::object(); };
  if (!resume) session.checkpoint(state(), cursor);
  const std::uint64_t chunk = std::clamp<std::uint64_t>(job.checkpoint_every, 1, 1 << 16);
  while (cursor < job.hi) {
    const std::uint64_t end = std::min(job.hi, cursor + chunk);
    sigma_ratio_range(cursor, end, job.arith, [&](const SigmaRatio& r) {
      session.before(r.n);
      session.emit(robin_verdict(r, job.precision));
    });
    const std::uint64_t done = end - cursor;
    cursor = end;
    if (cursor < job.hi) session.tick(done, state, cursor);
  }
  return session.finish(state(), cursor);
}

inline ScanOutcome dispatch(const ScanJob& job, const RunHooks& hooks, const std::optional<ScanCheckpoint>& resume) {
  switch (job.kind) {
    case ScanKind::NICOLAS:
    case ScanKind::CLM:
      return job.precision == Precision::HIGH ? run_primorial<long double>(job, hooks, resume)
                                              : run_primorial<double>(job, hooks, resume);
    case ScanKind::ROBIN: return run_robin(job, hooks, resume);
    default: throw StoreError(std::string("scan kind '") + to_string(job.kind) + "' is not resumable");
  }
}

}  // namespace detail

/// Cold run: truncates any previous rows for this scan_id.
inline ScanOutcome run_scan(const ScanJob& job, const RunHooks& hooks = {}) {
  if (job.scan_id.empty() || job.scan_id.find_first_of("/\\") != std::string::npos)
    throw ConfigError("scan_id", "must be a non-empty file name");
  if (job.checkpoint_every == 0) throw ConfigError("checkpoint_every", "must be >= 1");
  if (!(job.checkpoint_seconds > 0)) throw ConfigError("checkpoint_seconds", "must be > 0");
  return detail::dispatch(job, hooks, std::nullopt);
}

/// Continues `scan_id` in `out_dir` from its last checkpoint.
inline ScanOutcome resume_scan(const std::filesystem::path& out_dir, const std::string& scan_id, const RunHooks& hooks = {}) {
  const auto path = out_dir / (scan_id + ".checkpoint.json");
  if (!std::filesystem::exists(path)) throw StoreError("no checkpoint for scan '" + scan_id + "' in " + out_dir.string());
  const ScanCheckpoint c = checkpoint_read(path);
  return detail::dispatch(job_from_checkpoint(c, out_dir), hooks, c);
}

}  // namespace nrl
