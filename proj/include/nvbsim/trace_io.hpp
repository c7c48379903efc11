#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nvbsim/types.hpp"

namespace nvbsim {

// One parsed trace line before timestamp normalization. FILETIME ticks are
// kept integral; converting to seconds before subtracting the epoch would
// shed precision (2^53 < typical tick values).
struct RawRequest {
  std::uint64_t timestamp_ticks = 0;  // 100 ns units
  std::uint32_t disk = 0;
  AccessKind kind = AccessKind::kRead;
  std::uint64_t offset_bytes = 0;
  std::uint64_t size_bytes = 0;
  std::uint64_t response_time_us = 0;

  Request to_request(std::uint64_t epoch_ticks) const;
};

// Seven comma-separated fields: Timestamp,Hostname,DiskNumber,Type,Offset,
// Size,ResponseTime. Throws ParseError (line number filled by the caller's
// context via the line_no argument).
RawRequest parse_msrc_raw(std::string_view line, std::uint64_t line_no = 0);
Request parse_msrc_line(std::string_view line, std::uint64_t epoch_ticks,
                        std::uint64_t line_no = 0);

// Splits a byte-range request into per-page accesses, one per touched page.
// Sub-page requests round outward to whole pages.
std::vector<PageAccess> expand_to_pages(const Request& req, std::uint64_t page_size);

struct TraceLoadOptions {
  std::uint64_t page_size = 4096;
  bool abort_on_parse_error = false;  // default: count and skip malformed lines
  std::uint64_t max_accesses = 0;     // 0 = no truncation, counted in page accesses
};

struct TraceLoadResult {
  std::vector<PageAccess> accesses;
  std::uint64_t lines_total = 0;
  std::uint64_t lines_skipped = 0;
  std::uint64_t requests = 0;
  bool sorted_input = true;  // false when the loader had to sort by timestamp
};

// Reads a plain or gzip-compressed MSRC CSV (gzip detected by magic bytes),
// normalizes timestamps to seconds since the first record and expands the
// requests onto pages.
TraceLoadResult load_msrc_trace(const std::string& path, const TraceLoadOptions& opt);

enum class Pattern : std::uint8_t { kSequential, kUniform, kZipf };

struct TraceSpec {
  std::uint64_t access_count = 0;
  std::uint64_t page_universe = 0;
  Pattern pattern = Pattern::kUniform;
  double zipf_theta = 0.9;           // used when pattern == kZipf
  double write_fraction = 0.5;       // in [0,1]
  double interarrival_s = 0.001;     // fixed gap, or mean when exponential
  bool exponential_interarrival = false;
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError
};

// Deterministic synthetic page-access stream. One mt19937_64 stream seeded
// from spec.seed; per access the draws are page, kind, inter-arrival, in
// that order. Timestamps are generated on the 100 ns tick grid so writing
// the stream out as CSV and reloading it reproduces it bit for bit.
std::vector<PageAccess> generate_synthetic(const TraceSpec& spec);

// Writes the stream generate_synthetic(spec) would produce as an MSRC CSV
// (hostname "synth", one page_size-sized request per access).
void write_synthetic_csv(const TraceSpec& spec, std::uint64_t page_size,
                         const std::string& path);

std::string pattern_name(Pattern p);
Pattern pattern_from_name(const std::string& name);  // throws ConfigError

}  // namespace nvbsim
