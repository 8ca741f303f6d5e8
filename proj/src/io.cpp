#include "acmob/io.hpp"

#include <bit>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace acmob {

namespace {

std::string row(const StepRecord& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g\n", r.n, r.t,
                r.tau, r.energy, r.max_norm, r.max_val, r.min_val, r.solver_iters,
                r.solver_residual);
  return buf;
}

std::string errno_text() { return std::strerror(errno); }

template <typename T>
T parse_number(const std::string& s, const std::filesystem::path& path, const std::string& what) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw IoError(path, "bad " + what + " '" + s + "'");
  return v;
}

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
  return out;
}

}  // namespace

std::string format_csv(const std::vector<StepRecord>& records) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : records) out += row(r);
  return out;
}

void write_csv(const std::vector<StepRecord>& records, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError(path, "cannot open for writing: " + errno_text());
  f << format_csv(records);
  if (!f) throw IoError(path, "write failed");
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : path_(path) {
  file_ = std::fopen(path.string().c_str(), "wb");
  if (!file_) throw IoError(path, "cannot open for writing: " + errno_text());
  if (std::fprintf(file_, "%s\n", kCsvHeader) < 0) throw IoError(path, "write failed");
}

CsvWriter::~CsvWriter() {
  if (file_) std::fclose(file_);
}

void CsvWriter::append(const StepRecord& r) {
  const auto s = row(r);
  if (std::fputs(s.c_str(), file_) < 0 || std::fflush(file_) != 0)
    throw IoError(path_, "write failed");
}

std::vector<StepRecord> read_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError(path, "cannot open for reading");
  std::string line;
  if (!std::getline(f, line) || line != kCsvHeader)
    throw IoError(path, "unexpected CSV header");
  std::vector<StepRecord> out;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
    if (cols.size() != 9)
      throw IoError(path, "line " + std::to_string(lineno) + ": expected 9 columns");
    StepRecord r;
    r.n = parse_number<int>(cols[0], path, "n");
    r.t = parse_number<double>(cols[1], path, "t");
    r.tau = parse_number<double>(cols[2], path, "tau");
    r.energy = parse_number<double>(cols[3], path, "energy");
    r.max_norm = parse_number<double>(cols[4], path, "max_norm");
    r.max_val = parse_number<double>(cols[5], path, "max_val");
    r.min_val = parse_number<double>(cols[6], path, "min_val");
    r.solver_iters = parse_number<int>(cols[7], path, "solver_iters");
    r.solver_residual = parse_number<double>(cols[8], path, "solver_residual");
    r.mbp_violation = std::max(0.0, r.max_norm - 1.0);
    if (!out.empty()) r.energy_increase = std::max(0.0, r.energy - out.back().energy);
    out.push_back(r);
  }
  return out;
}

void write_snapshot(const Field& f, const SnapshotMeta& meta, const std::filesystem::path& path) {
  const auto& g = f.spec();
  char header[256];
  std::snprintf(header, sizeof header,
                "acmob-snapshot dim=%d M=%td L=%.17g origin=%.17g t=%.17g eps=%.17g\n", g.dim(),
                g.cells_per_dim(), g.domain_length(), g.origin(), meta.t, meta.eps);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path, "cannot open for writing: " + errno_text());
  out << header;
  std::vector<std::uint64_t> payload(static_cast<std::size_t>(f.size()));
  for (Eigen::Index i = 0; i < f.size(); ++i)
    payload[static_cast<std::size_t>(i)] = to_little_endian(std::bit_cast<std::uint64_t>(f[i]));
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(std::uint64_t)));
  if (!out) throw IoError(path, "write failed");
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  std::string header;
  if (!std::getline(in, header)) throw IoError(path, "missing header");
  std::istringstream hs(header);
  std::string magic;
  hs >> magic;
  if (magic != "acmob-snapshot") throw IoError(path, "not a snapshot file");
  std::map<std::string, std::string> kv;
  for (std::string tok; hs >> tok;) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw IoError(path, "bad header token '" + tok + "'");
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  for (const char* key : {"dim", "M", "L", "origin", "t", "eps"})
    if (!kv.contains(key)) throw IoError(path, std::string("header lacks ") + key);

  const GridSpec g(parse_number<int>(kv["dim"], path, "dim"),
                   parse_number<std::ptrdiff_t>(kv["M"], path, "M"),
                   parse_number<double>(kv["L"], path, "L"),
                   parse_number<double>(kv["origin"], path, "origin"));
  Snapshot s{Field(g), {parse_number<double>(kv["t"], path, "t"),
                        parse_number<double>(kv["eps"], path, "eps")}};
  std::vector<std::uint64_t> payload(static_cast<std::size_t>(g.size()));
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(payload.size() * sizeof(std::uint64_t)));
  if (in.gcount() != static_cast<std::streamsize>(payload.size() * sizeof(std::uint64_t)))
    throw IoError(path, "truncated payload");
  if (in.peek() != std::char_traits<char>::eof()) throw IoError(path, "trailing bytes");
  for (Eigen::Index i = 0; i < g.size(); ++i)
    s.field[i] = std::bit_cast<double>(to_little_endian(payload[static_cast<std::size_t>(i)]));
  return s;
}

}  // namespace acmob
