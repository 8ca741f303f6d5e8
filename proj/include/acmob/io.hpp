#pragma once

#include "acmob/diagnostics.hpp"
#include "acmob/grid.hpp"

#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace acmob {

class IoError : public std::runtime_error {
public:
  IoError(const std::filesystem::path& path, const std::string& msg)
      : std::runtime_error(path.string() + ": " + msg) {}
};

inline constexpr const char* kCsvHeader =
    "n,t,tau,energy,max_norm,max_val,min_val,solver_iters,solver_residual";

/// Header line plus one row per record, doubles printed with %.17g.
std::string format_csv(const std::vector<StepRecord>& records);
void write_csv(const std::vector<StepRecord>& records, const std::filesystem::path& path);

/// Incremental writer for long runs; rows are flushed as they arrive.
class CsvWriter {
public:
  explicit CsvWriter(const std::filesystem::path& path);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;
  void append(const StepRecord& r);

private:
  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
};

/// Parses a CSV produced by write_csv. mbp_violation and energy_increase are
/// recomputed from the columns (the latter needs the previous row).
std::vector<StepRecord> read_csv(const std::filesystem::path& path);

struct SnapshotMeta {
  double t = 0.0;
  double eps = 0.0;
};

/// Text header line "acmob-snapshot dim=.. M=.. L=.. origin=.. t=.. eps=..",
/// a newline, then size() little-endian float64 values in x-fastest order.
void write_snapshot(const Field& f, const SnapshotMeta& meta, const std::filesystem::path& path);

struct Snapshot {
  Field field;
  SnapshotMeta meta;
};
Snapshot read_snapshot(const std::filesystem::path& path);

}  // namespace acmob
