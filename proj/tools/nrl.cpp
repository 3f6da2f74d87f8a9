// nrl: command-line driver for the Nicolas / Robin / CLM scans, the asymptotic
// audit, the Mertens and C/D fits, the theta probe and the pinned constants.
//
// Exit codes: 0 clean, 1 any FAILS, 2 only INDETERMINATE, 3 usage or config
// error, 4 runtime error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "nrl/nrl.hpp"

namespace fs = std::filesystem;
using namespace nrl;

namespace {

constexpr int kExitUsage = 3;
constexpr int kExitRuntime = 4;

struct Globals {
  std::string out;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::string precision = "guarded";
  std::uint64_t checkpoint_every = 1'000'000;
  double checkpoint_seconds = 30;
  bool no_timestamps = false;
  std::string format = "csv";
  std::string rows = "all";
  std::uint64_t prime_ceiling = std::uint64_t{1} << 40;
  std::uint64_t range_ceiling = 1'000'000'000;
  EtaDefaults eta;
};

fs::path out_dir(const Globals& g) {
  if (!g.out.empty()) return g.out;
  if (const char* env = std::getenv("NRL_OUT_DIR"); env && *env) return env;
  return ".";
}

ScanJob base_job(const Globals& g, ScanKind kind, std::uint64_t lo, std::uint64_t hi, const std::string& id) {
  ScanJob j;
  j.kind = kind;
  j.lo = lo;
  j.hi = hi;
  j.scan_id = id.empty() ? std::string(to_string(kind)) + "-" + std::to_string(lo) + "-" + std::to_string(hi) : id;
  j.precision = parse_precision(g.precision);
  j.format = parse_row_format(g.format);
  j.filter = g.rows == "all" ? RowFilter::ALL : RowFilter::NOT_HOLDS;
  j.out_dir = out_dir(g);
  j.checkpoint_every = g.checkpoint_every;
  j.checkpoint_seconds = g.checkpoint_seconds;
  j.timestamps = !g.no_timestamps;
  j.sieve.workers = j.arith.workers = g.workers;
  j.sieve.ceiling = g.prime_ceiling;
  j.arith.range_ceiling = g.range_ceiling;
  return j;
}

StridePolicy parse_stride(const std::string& s) {
  if (s == "all") return StridePolicy::all();
  const std::string prefix = "geometric:";
  if (s.rfind(prefix, 0) == 0) {
    try {
      return StridePolicy::geometric(std::stod(s.substr(prefix.size())));
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("stride", "expected 'all' or 'geometric:<ratio > 1>', got '" + s + "'");
}

int exit_code(const ScanTally& t, std::uint64_t ignore_fails_upto = 0) {
  std::uint64_t fails = 0;
  for (const auto& r : t.failures)
    if (r.subject > ignore_fails_upto) ++fails;
  if (fails > 0) return 1;
  if (t.indeterminate > 0) return 2;
  return 0;
}

void print_outcome(const ScanOutcome& o) {
  const auto& t = o.tally;
  std::cout << o.job.scan_id << ": " << t.total << " verdicts, HOLDS=" << t.holds << " FAILS=" << t.fails
            << " INDETERMINATE=" << t.indeterminate << " UNDEFINED_RHS=" << t.undefined << "\n";
  if (!t.failures.empty()) {
    std::cout << "  FAILS at:";
    std::size_t shown = 0;
    for (const auto& r : t.failures) {
      if (++shown > 40) {
        std::cout << " ...";
        break;
      }
      std::cout << " " << r.subject;
    }
    std::cout << "\n";
  }
  if (o.job.kind == ScanKind::ROBIN && t.fails > 0) {
    std::cout << "  by omega:";
    for (const auto& [w, n] : t.crosstab.fails_by_omega) std::cout << " " << w << ":" << n;
    std::cout << "  strict HR=" << t.crosstab.fails_strict_hr << " weak HR=" << t.crosstab.fails_weak_hr
              << " not weak HR=" << t.crosstab.fails_not_weak_hr << "\n";
  }
  std::cout << "  rows: " << o.job.rows_path().string() << "\n  summary: " << o.job.summary_path().string() << "\n";
}

/// "lo:hi:kind[:points]" with kind geometric | linear | decade.
std::vector<std::uint64_t> parse_grid(const std::string& spec, const std::string& field, std::size_t default_points) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() < 2 || parts.size() > 4) throw ConfigError(field, "expected lo:hi[:kind[:points]], got '" + spec + "'");
  auto num = [&](const std::string& s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size() || !(v >= 1) || v > 1e15) throw std::invalid_argument(s);
      return static_cast<std::uint64_t>(std::llround(v));
    } catch (const std::exception&) {
      throw ConfigError(field, "bad number '" + s + "' in grid '" + spec + "'");
    }
  };
  const std::uint64_t lo = num(parts[0]), hi = num(parts[1]);
  if (lo > hi) throw ConfigError(field, "grid lo > hi in '" + spec + "'");
  const std::string kind = parts.size() >= 3 ? parts[2] : "geometric";
  const std::size_t points = parts.size() == 4 ? static_cast<std::size_t>(num(parts[3])) : default_points;
  if (kind == "geometric") return geometric_grid(lo, hi, points);
  if (kind == "linear") return linear_grid(lo, hi, points);
  if (kind == "decade") return decade_grid(lo, hi, static_cast<unsigned>(points));
  throw ConfigError(field, "unknown grid kind '" + kind + "'");
}

std::ofstream open_csv(const fs::path& p) {
  fs::create_directories(p.parent_path().empty() ? fs::path(".") : p.parent_path());
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw StoreError("cannot write " + p.string());
  return f;
}

std::string num(double x) { return format_decimal(x); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nicolas / Robin inequality verification and asymptotic audit toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key = value configuration file (flags override it)");
  app.allow_config_extras(CLI::config_extras_mode::error);

  Globals g;
  app.add_option("--out", g.out, "Output directory (default: $NRL_OUT_DIR, else .)");
  app.add_option("--workers", g.workers, "Worker threads")->check(CLI::Range(1u, 1024u));
  app.add_option("--precision", g.precision, "fast64 | guarded | high")
      ->check(CLI::IsMember({"fast64", "guarded", "high"}));
  app.add_option("--checkpoint-every", g.checkpoint_every, "Checkpoint every N subjects")->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 62));
  app.add_option("--checkpoint-seconds", g.checkpoint_seconds, "Checkpoint at least this often")->check(CLI::PositiveNumber);
  app.add_flag("--no-timestamps", g.no_timestamps, "Omit timestamps and wall times (reproducible outputs)");
  app.add_option("--format", g.format, "Row format: csv | jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  app.add_option("--rows", g.rows, "Rows to write: all | not-holds")->check(CLI::IsMember({"all", "not-holds"}));
  app.add_option("--prime-ceiling", g.prime_ceiling, "Largest prime the sieve may reach")->check(CLI::Range(std::uint64_t{16}, std::uint64_t{1} << 62));
  app.add_option("--range-ceiling", g.range_ceiling, "Largest n for sigma scans")->check(CLI::Range(std::uint64_t{2}, std::uint64_t{1} << 40));
  app.add_option("--eta1", g.eta.eta1, "Configured eta_1")->check(CLI::PositiveNumber);
  app.add_option("--eta2", g.eta.eta2, "Configured eta_2")->check(CLI::PositiveNumber);
  app.add_option("--eta3", g.eta.eta3, "Configured eta_3")->check(CLI::PositiveNumber);

  std::string scan_id;
  std::string stride = "all";

  // nicolas
  std::uint64_t k_lo = 0, k_hi = 0;
  auto* nic = app.add_subcommand("nicolas", "Nicolas inequality N_k/phi(N_k) > e^gamma log log N_k for k in [K_LO, K_HI]");
  nic->add_option("k_lo", k_lo)->required();
  nic->add_option("k_hi", k_hi)->required();
  nic->add_option("--scan-id", scan_id);
  nic->add_option("--stride", stride, "all | geometric:<ratio>");

  // clm
  std::string reading = "both";
  auto* clm = app.add_subcommand("clm", "Upper product prod (p+1)/p < e^gamma log log N_k^2 for k in [K_LO, K_HI]");
  clm->add_option("k_lo", k_lo)->required();
  clm->add_option("k_hi", k_hi)->required();
  clm->add_option("--scan-id", scan_id);
  clm->add_option("--stride", stride, "all | geometric:<ratio>");
  clm->add_option("--reading", reading, "loglog-of-square | square-of-loglog | both")
      ->check(CLI::IsMember({"loglog-of-square", "square-of-loglog", "both"}));

  // robin
  std::uint64_t n_lo = 0, n_hi = 0;
  bool expect_small = false;
  auto* rob = app.add_subcommand("robin", "Robin inequality sigma(n)/n < e^gamma log log n for n in [LO, HI)");
  rob->add_option("lo", n_lo)->required();
  rob->add_option("hi", n_hi)->required();
  rob->add_option("--scan-id", scan_id);
  rob->add_flag("--expect-small-exceptions", expect_small, "Exceptions n <= 5040 do not affect the exit code");

  // hr-scan
  std::size_t max_m = 20;
  double max_log_n = 100;
  auto* hr = app.add_subcommand("hr-scan", "Robin check over Hardy-Ramanujan candidates");
  hr->add_option("--max-m", max_m, "Number of distinct primes")->check(CLI::Range(std::size_t{1}, std::size_t{10000}));
  hr->add_option("--max-log-n", max_log_n, "Bound on log n")->check(CLI::PositiveNumber);
  hr->add_option("--scan-id", scan_id);

  // audit
  std::string track = "all";
  std::uint64_t kmax = 10000;
  std::string audit_grid = "1e4:1e6";
  auto* aud = app.add_subcommand("audit", "Recurrence coefficient ledger and numeric confrontation");
  aud->add_option("--track", track, "displayed | proof | consistent | all")
      ->check(CLI::IsMember({"displayed", "proof", "consistent", "all"}));
  aud->add_option("--kmax", kmax, "Nicolas scan length for the confrontation")->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 36));
  aud->add_option("--cd-maxima", audit_grid, "lo:hi; C/D is fitted on nested grids ending at each power of ten in [lo, hi]");

  // fit
  std::string fit_grid = "1e4:1e6:geometric";
  bool curvature = false;
  auto* fit = app.add_subcommand("fit", "Mertens constant and C, D fits over a grid of prime indices");
  fit->add_option("--grid", fit_grid, "lo:hi[:geometric|linear|decade[:points]]");
  fit->add_flag("--curvature", curvature, "Add a 1/log^2 p term to the Mertens fit");

  // probe
  int s = 1;
  std::string probe_grid = "1:1e6:decade:8";
  auto* probe = app.add_subcommand("probe", "theta(p_m) against p_m (1 + eta_s / log^s p_m)");
  probe->add_option("--s", s, "1, 2 or 3")->check(CLI::Range(1, 3));
  probe->add_option("--grid", probe_grid, "lo:hi[:kind[:points]] over prime indices");

  // constants
  auto* cons = app.add_subcommand("constants", "Print gamma, e^gamma and M with radii");

  // resume
  std::string resume_id;
  auto* res = app.add_subcommand("resume", "Resume a checkpointed scan");
  res->add_option("scan_id", resume_id)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  std::cout.precision(10);
  try {
    const fs::path out = out_dir(g);

    if (nic->parsed() || clm->parsed()) {
      if (k_lo < 1 || k_lo > k_hi) throw ConfigError("k_lo", "need 1 <= k_lo <= k_hi");
      const ScanKind kind = nic->parsed() ? ScanKind::NICOLAS : ScanKind::CLM;
      ScanJob job = base_job(g, kind, k_lo, k_hi, scan_id);
      job.stride = parse_stride(stride);
      if (kind == ScanKind::NICOLAS) {
        const auto o = run_scan(job);
        print_outcome(o);
        return exit_code(o.tally);
      }
      // CLM: the claim is stated for k > 4; smaller k are informational.
      std::vector<ClmReading> readings;
      if (reading != "square-of-loglog") readings.push_back(ClmReading::LOGLOG_OF_SQUARE);
      if (reading != "loglog-of-square") readings.push_back(ClmReading::SQUARE_OF_LOGLOG);
      int code = 0;
      for (std::size_t i = 0; i < readings.size(); ++i) {
        ScanJob j = job;
        j.reading = readings[i];
        if (reading == "both") j.scan_id += std::string("-") + to_string(readings[i]);
        const auto o = run_scan(j);
        std::cout << "[" << to_string(readings[i]) << (i == 0 ? ", implemented reading" : ", alternative reading") << "] ";
        print_outcome(o);
        if (i == 0) code = exit_code(o.tally, 4);
      }
      return code;
    }

    if (rob->parsed()) {
      if (n_lo < 2 || n_lo >= n_hi) throw ConfigError("hi", "empty range: need 2 <= lo < hi");
      const auto o = run_scan(base_job(g, ScanKind::ROBIN, n_lo, n_hi, scan_id));
      print_outcome(o);
      return exit_code(o.tally, expect_small ? 5040 : 0);
    }

    if (hr->parsed()) {
      const std::string id = scan_id.empty() ? "hr-" + std::to_string(max_m) : scan_id;
      std::vector<ResultRow> rows;
      const auto sum = hr_scan(max_m, max_log_n, parse_precision(g.precision),
                               [&](const CheckVerdict& v) {
                                 if (g.rows == "all" || v.status != Status::HOLDS) rows.push_back(to_row(id, v));
                               });
      fs::create_directories(out);
      const RowFormat fmt = parse_row_format(g.format);
      emit_rows(rows, fmt, out / (id + ".rows." + to_string(fmt)));
      json fails = json::array();
      for (std::size_t i = 0; i < sum.scan.failures.size(); ++i)
        fails.push_back({{"ordinal", sum.scan.failures[i].subject}, {"exponents", sum.failing_exponents[i]}});
      json doc{{"scan_id", id}, {"kind", "hr-scan"}, {"max_m", max_m}, {"max_log_n", max_log_n},
               {"total", sum.scan.total}, {"holds", sum.scan.holds}, {"fails", sum.scan.fails},
               {"indeterminate", sum.scan.indeterminate}, {"failures", fails}};
      write_document(out / (id + ".summary.json"), doc);
      std::cout << id << ": " << sum.scan.total << " candidates, FAILS=" << sum.scan.fails
                << " INDETERMINATE=" << sum.scan.indeterminate << "\n";
      if (sum.scan.fails > 0) return 1;
      return sum.scan.indeterminate > 0 ? 2 : 0;
    }

    if (aud->parsed()) {
      std::vector<Track> tracks;
      if (track == "all") tracks = {Track::DISPLAYED, Track::PROOF, Track::CONSISTENT};
      else if (track == "displayed") tracks = {Track::DISPLAYED};
      else if (track == "proof") tracks = {Track::PROOF};
      else tracks = {Track::CONSISTENT};

      const auto maxima_grid = parse_grid(audit_grid, "cd-maxima", 1);
      std::vector<std::uint64_t> maxima;
      const CdGridSpec cd_spec;
      for (std::uint64_t m = 10; m <= maxima_grid.back(); m *= 10)
        if (m >= maxima_grid.front() && m >= 10 * cd_spec.start) maxima.push_back(m);
      if (maxima.size() < 2)
        throw ConfigError("cd-maxima", "need at least two powers of ten >= " + std::to_string(10 * cd_spec.start));

      ScanOptions so;
      so.precision = parse_precision(g.precision);
      so.sieve.workers = g.workers;
      so.sieve.ceiling = g.prime_ceiling;

      json doc{{"kind", "audit"}};
      json reports = json::array();
      for (Track t : tracks) {
        const auto r = assemble_recurrence(t);
        reports.push_back(to_json(r));
        std::cout << "track " << to_string(t) << ": rhs = " << r.rhs << "\n";
        for (const auto& c : r.orders)
          std::cout << "  1/(m log^" << c.order << " m): claim [" << c.claim_text << "] recomputed " << c.recomputed.str()
                    << " -> " << to_string(c.match) << "\n";
        std::cout << "  " << r.notes << "\n";
      }
      doc["recurrence"] = reports;
      doc["loglog_shift_variants"] = to_json(audit_loglog_shift());
      json ids = json::array();
      for (const auto& c : identity_checks()) ids.push_back(to_json(c));
      doc["identity_checks"] = ids;
      const auto trend = fit_cd_trend(maxima, cd_spec, so.sieve);
      doc["cd_fit"] = to_json(trend);
      const Track conf_track = tracks.size() == 1 ? tracks.front() : Track::PROOF;
      const auto v = verdict_confrontation(kmax, conf_track, so);
      doc["confrontation"] = to_json(v);
      doc["notes"] = json::array({
          "f(m) is expanded in 1/log m (the second-order denominator is read as log m)",
          "the m-free layer (modulo 1/log^3 m) and the shift calculus (modulo 1/m^2 and 1/(m log^4 m)) are kept separate",
          "the displayed track keeps +1/p_m as typeset in the assembled recurrence; the proof track uses -1/p_m"});
      fs::create_directories(out);
      write_document(out / "audit.json", doc);
      std::cout << "C/D fit: " << trend.statement << "\n";
      for (const auto& p : trend.points)
        std::cout << "  m <= " << p.m_max << ": C = " << p.c << " +- " << p.c_err << ", D = " << p.d << " +- " << p.d_err << "\n";
      std::cout << "confrontation (k <= " << kmax << "): " << v.statement << "\n";
      std::cout << "report: " << (out / "audit.json").string() << "\n";
      return 0;
    }

    if (fit->parsed()) {
      const auto grid = parse_grid(fit_grid, "grid", 40);
      if (grid.size() < 6) throw ConfigError("grid", "fit needs at least 6 grid points");
      SieveConfig sc;
      sc.workers = g.workers;
      sc.ceiling = g.prime_ceiling;
      const auto samples = sample_reciprocal_sums(grid, sc);
      const double m_pinned = mertens_constant().value;
      std::vector<double> xs, ys, rs;
      auto table = open_csv(out / "fit_samples.csv");
      table << "m,p_m,log_p,reciprocal_sum,loglog_p,mertens_sample,remainder\n";
      for (const auto& smp : samples) {
        const double lp = static_cast<double>(smp.log_p());
        const double ms = static_cast<double>(smp.reciprocal_sum.value - smp.loglog_p.value);
        xs.push_back(lp);
        ys.push_back(ms);
        rs.push_back(ms - m_pinned);
        table << smp.m << "," << smp.p_m << "," << num(lp) << "," << num(static_cast<double>(smp.reciprocal_sum.value)) << ","
              << num(static_cast<double>(smp.loglog_p.value)) << "," << num(ms) << "," << num(ms - m_pinned) << "\n";
      }
      const ErrBound mest = fit_mertens_samples(xs, ys, curvature);
      const CdFit cd = fit_cd_samples(grid, xs, rs);
      auto summary = open_csv(out / "fit.csv");
      summary << "target,value,std_error,residual_norm,grid_lo,grid_hi,points\n";
      summary << "M," << num(mest.value) << "," << num(mest.radius) << ",," << grid.front() << "," << grid.back() << ","
              << grid.size() << "\n";
      for (const FitResult* f : {&cd.c, &cd.d})
        summary << f->target << "," << num(f->fitted[0]) << "," << num(f->std_errors[0]) << "," << num(f->residual_norm) << ","
                << grid.front() << "," << grid.back() << "," << grid.size() << "\n";
      std::cout << "M = " << mest.value << " +- " << mest.radius << " (pinned " << m_pinned << ")\n"
                << "C = " << cd.c.fitted[0] << " +- " << cd.c.std_errors[0] << ", D = " << cd.d.fitted[0] << " +- "
                << cd.d.std_errors[0] << "\n"
                << "tables: " << (out / "fit.csv").string() << ", " << (out / "fit_samples.csv").string() << "\n";
      return 0;
    }

    if (probe->parsed()) {
      const auto grid = parse_grid(probe_grid, "grid", 8);
      SieveConfig sc;
      sc.workers = g.workers;
      sc.ceiling = g.prime_ceiling;
      const auto t = theta_bound_probe(s, grid, g.eta, sc);
      const fs::path p = out / ("probe_s" + std::to_string(s) + ".csv");
      auto f = open_csv(p);
      f << "m,p_m,theta,eta_signed\n";
      for (const auto& r : t.rows) f << r.m << "," << r.p_m << "," << num(r.theta) << "," << num(r.eta_signed) << "\n";
      std::cout << "s = " << s << ": empirical eta = " << t.empirical_eta << " (one-sided max " << t.one_sided_max
                << "), configured eta = " << t.configured_eta << " [" << t.provenance << "], "
                << (t.consistent ? "consistent" : "NOT consistent") << "\ntable: " << p.string() << "\n";
      return 0;
    }

    if (cons->parsed()) {
      for (const char* name : {"gamma", "exp_gamma", "mertens"}) {
        const auto c = get_constant(name);
        std::cout << c.name << " = " << c.digits(45) << " +- " << c.radius.str(3, std::ios_base::scientific) << " ("
                  << to_string(c.source) << ")\n";
      }
      return 0;
    }

    if (res->parsed()) {
      const auto o = resume_scan(out, resume_id);
      print_outcome(o);
      return exit_code(o.tally, o.job.kind == ScanKind::CLM ? 4 : 0);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidRange& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
