#pragma once

// Persistence for long scans: result rows (CSV / JSONL), checkpoints written by
// temp-file-then-rename, and JSON report documents.

#include <cerrno>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <fcntl.h>
#include <unistd.h>

#include <json.hpp>

#include "errors.hpp"

namespace nrl {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Decimal text

/// Shortest decimal text that parses back to exactly `x`.
template <typename Real>
std::string format_decimal(Real x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  if (res.ec != std::errc()) throw StoreError("format_decimal: conversion failed");
  return std::string(buf, res.ptr);
}

template <typename Real>
Real parse_decimal(const std::string& s) {
  Real x{};
  const char* first = s.data();
  const char* last = s.data() + s.size();
  // from_chars rejects a leading '+'; "-nan" is accepted as NaN.
  const auto res = std::from_chars(first, last, x);
  if (res.ec != std::errc() || res.ptr != last) throw StoreError("parse_decimal: malformed number '" + s + "'");
  return x;
}

inline std::string format_u64(std::uint64_t v) { return std::to_string(v); }
inline std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw StoreError("parse_u64: malformed integer '" + s + "'");
  return v;
}

// ---------------------------------------------------------------------------
// Result rows

struct ResultRow {
  std::string scan_id;
  std::uint64_t subject = 0;
  std::string lhs_log;
  std::string rhs_log;
  std::string margin;
  std::string radius;
  std::string status;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

inline const std::vector<std::string>& row_columns() {
  static const std::vector<std::string> cols{"scan_id", "subject", "lhs_log", "rhs_log", "margin", "radius", "status"};
  return cols;
}

enum class RowFormat { CSV, JSONL };

inline const char* to_string(RowFormat f) { return f == RowFormat::CSV ? "csv" : "jsonl"; }
inline RowFormat parse_row_format(const std::string& s) {
  if (s == "csv") return RowFormat::CSV;
  if (s == "jsonl") return RowFormat::JSONL;
  throw ConfigError("format", "expected csv or jsonl, got '" + s + "'");
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// Splits one CSV record (RFC 4180). `in` must be positioned at the record start.
inline bool read_csv_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool quoted = false, any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

inline std::string jsonl_header() {
  return json{{"format", "nrl-rows"}, {"version", 1}, {"columns", row_columns()}}.dump();
}

}  // namespace detail

inline std::string encode_row(const ResultRow& r, RowFormat f) {
  if (f == RowFormat::CSV) {
    return detail::csv_field(r.scan_id) + "," + format_u64(r.subject) + "," + detail::csv_field(r.lhs_log) + "," +
           detail::csv_field(r.rhs_log) + "," + detail::csv_field(r.margin) + "," + detail::csv_field(r.radius) + "," +
           detail::csv_field(r.status) + "\n";
  }
  // Key order follows the column order (nlohmann::ordered_json keeps insertion order).
  nlohmann::ordered_json j;
  j["scan_id"] = r.scan_id;
  j["subject"] = r.subject;
  j["lhs_log"] = r.lhs_log;
  j["rhs_log"] = r.rhs_log;
  j["margin"] = r.margin;
  j["radius"] = r.radius;
  j["status"] = r.status;
  return j.dump() + "\n";
}

inline std::string row_header(RowFormat f) {
  if (f == RowFormat::JSONL) return detail::jsonl_header() + "\n";
  std::string h;
  for (const auto& c : row_columns()) h += (h.empty() ? "" : ",") + c;
  return h + "\n";
}

/// Append-only row file. A fresh file starts with the header; reopening with
/// `truncate_to` discards everything past that byte offset first (used on
/// resume to drop rows written after the last checkpoint).
class RowWriter {
 public:
  RowWriter(const std::filesystem::path& path, RowFormat format, std::optional<std::uint64_t> truncate_to = std::nullopt)
      : path_(path), format_(format) {
    std::error_code ec;
    if (truncate_to) {
      if (!std::filesystem::exists(path_)) throw StoreError("resume: row file missing: " + path_.string());
      std::filesystem::resize_file(path_, *truncate_to, ec);
      if (ec) throw StoreError("resume: cannot truncate " + path_.string() + ": " + ec.message());
      out_.open(path_, std::ios::binary | std::ios::app);
      bytes_ = *truncate_to;
    } else {
      out_.open(path_, std::ios::binary | std::ios::trunc);
      bytes_ = 0;
      write_raw(row_header(format_));
    }
    if (!out_) throw StoreError("cannot open row file " + path_.string());
  }

  void write(const ResultRow& r) { write_raw(encode_row(r, format_)); }

  void flush() {
    out_.flush();
    if (!out_) throw StoreError("write failed on " + path_.string() + " (disk full?)");
  }

  std::uint64_t bytes_written() const { return bytes_; }
  RowFormat format() const { return format_; }

 private:
  void write_raw(const std::string& s) {
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    if (!out_) throw StoreError("write failed on " + path_.string() + " (disk full?)");
    bytes_ += s.size();
  }

  std::filesystem::path path_;
  RowFormat format_;
  std::ofstream out_;
  std::uint64_t bytes_ = 0;
};

/// Writes `rows` (already in subject order) to a fresh file.
inline void emit_rows(const std::vector<ResultRow>& rows, RowFormat format, const std::filesystem::path& path) {
  RowWriter w(path, format);
  for (const auto& r : rows) w.write(r);
  w.flush();
}

inline std::vector<ResultRow> read_rows(const std::filesystem::path& path, RowFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError("cannot open " + path.string());
  std::vector<ResultRow> rows;
  if (format == RowFormat::CSV) {
    std::vector<std::string> f;
    if (!detail::read_csv_record(in, f) || f != row_columns()) throw StoreError("bad CSV header in " + path.string());
    while (detail::read_csv_record(in, f)) {
      if (f.size() != 7) throw StoreError("bad CSV record in " + path.string());
      rows.push_back({f[0], parse_u64(f[1]), f[2], f[3], f[4], f[5], f[6]});
    }
  } else {
    std::string line;
    if (!std::getline(in, line)) throw StoreError("missing JSONL header in " + path.string());
    const auto header = json::parse(line);
    if (header.value("format", "") != "nrl-rows") throw StoreError("bad JSONL header in " + path.string());
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = json::parse(line);
      rows.push_back({j.at("scan_id").get<std::string>(), j.at("subject").get<std::uint64_t>(),
                      j.at("lhs_log").get<std::string>(), j.at("rhs_log").get<std::string>(),
                      j.at("margin").get<std::string>(), j.at("radius").get<std::string>(),
                      j.at("status").get<std::string>()});
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Atomic documents and checkpoints

/// Called after the temp file is fully written and before the rename; throwing
/// from it simulates a crash mid-commit.
using CommitHook = std::function<void(const std::filesystem::path& tmp)>;

/// Writes `content` to `path` via `path.tmp` + fsync + rename.
inline void atomic_write(const std::filesystem::path& path, const std::string& content, const CommitHook& hook = {}) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw StoreError("cannot create " + tmp.string() + ": " + std::strerror(errno));
  std::size_t off = 0;
  while (off < content.size()) {
    const ssize_t n = ::write(fd, content.data() + off, content.size() - off);
    if (n < 0) {
      const int err = errno;
      ::close(fd);
      throw StoreError("write " + tmp.string() + ": " + std::strerror(err));
    }
    off += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0) throw StoreError("fsync/close " + tmp.string() + ": " + std::strerror(errno));
  if (hook) hook(tmp);
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw StoreError("rename " + tmp.string() + " -> " + path.string() + ": " + ec.message());
}

inline void write_document(const std::filesystem::path& path, const json& doc) { atomic_write(path, doc.dump(2) + "\n"); }

inline constexpr int kCheckpointSchemaVersion = 1;

enum class ScanKind { NICOLAS, ROBIN, CLM, FIT, PROBE };

inline const char* to_string(ScanKind k) {
  switch (k) {
    case ScanKind::NICOLAS: return "nicolas";
    case ScanKind::ROBIN: return "robin";
    case ScanKind::CLM: return "clm";
    case ScanKind::FIT: return "fit";
    case ScanKind::PROBE: return "probe";
  }
  return "?";
}

inline ScanKind parse_scan_kind(const std::string& s) {
  for (auto k : {ScanKind::NICOLAS, ScanKind::ROBIN, ScanKind::CLM, ScanKind::FIT, ScanKind::PROBE})
    if (s == to_string(k)) return k;
  throw StoreError("unknown scan kind '" + s + "'");
}

struct ScanCheckpoint {
  std::string scan_id;
  ScanKind kind = ScanKind::NICOLAS;
  /// Next unprocessed subject.
  std::uint64_t cursor = 0;
  /// Scan-specific state; numbers stored as exact decimal text.
  json accumulator_state = json::object();
  /// Parameters needed to resume (range, precision, output format, ...).
  json params = json::object();
  std::string created_at;
  int schema_version = kCheckpointSchemaVersion;

  friend bool operator==(const ScanCheckpoint&, const ScanCheckpoint&) = default;
};

inline std::string utc_timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline json to_json(const ScanCheckpoint& c) {
  return json{{"format", "nrl-checkpoint"},
              {"schema_version", c.schema_version},
              {"scan_id", c.scan_id},
              {"kind", to_string(c.kind)},
              {"cursor", format_u64(c.cursor)},
              {"accumulator_state", c.accumulator_state},
              {"params", c.params},
              {"created_at", c.created_at}};
}

inline void checkpoint_write(const std::filesystem::path& path, const ScanCheckpoint& state, const CommitHook& hook = {}) {
  atomic_write(path, to_json(state).dump(2) + "\n", hook);
}

inline ScanCheckpoint checkpoint_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError("cannot open checkpoint " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw StoreError("malformed checkpoint " + path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "nrl-checkpoint") throw StoreError("not a checkpoint file: " + path.string());
  const int version = j.value("schema_version", -1);
  if (version != kCheckpointSchemaVersion)
    throw CheckpointVersionError("checkpoint schema_version " + std::to_string(version) + " != supported " +
                                 std::to_string(kCheckpointSchemaVersion));
  ScanCheckpoint c;
  c.schema_version = version;
  c.scan_id = j.at("scan_id").get<std::string>();
  c.kind = parse_scan_kind(j.at("kind").get<std::string>());
  c.cursor = parse_u64(j.at("cursor").get<std::string>());
  c.accumulator_state = j.at("accumulator_state");
  c.params = j.at("params");
  c.created_at = j.at("created_at").get<std::string>();
  return c;
}

}  // namespace nrl
