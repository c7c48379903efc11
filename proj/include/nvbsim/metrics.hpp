#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "nvbsim/buffer_core.hpp"
#include "nvbsim/reliability.hpp"
#include "nvbsim/schemes.hpp"
#include "nvbsim/types.hpp"

namespace nvbsim {

// Per-4KB-page service latencies in microseconds. A request's response time
// is the sum of the latencies of every memory operation it triggered, so an
// eviction's storage write lands on the triggering request.
struct LatencyModel {
  double dram_read_us = 1.0;
  double dram_write_us = 1.0;
  double pja_read_us = 2.0;
  double pja_write_us = 2.0;
  double storage_read_us = 100.0;
  double storage_write_us = 100.0;

  void validate() const;  // ConfigError unless all finite and >= 0
  double cost_us(const AccessOutcome& out) const;
};

// What a report was measured against; compare() refuses to mix identities.
struct TraceIdentity {
  std::string source;
  std::uint64_t accesses = 0;
  std::uint64_t page_size = 0;
  double start_s = 0.0;
  double end_s = 0.0;

  bool operator==(const TraceIdentity&) const = default;
};

struct RunReport {
  std::string label;
  TraceIdentity trace;

  // Configuration echo, so a report names everything that produced it.
  std::string mode;  // "nvb" or "hyb"
  std::uint64_t c_dram = 0;
  std::uint64_t c_pja = 0;
  SchemeConfig scheme;
  FailureParams failure_params;
  LatencyModel latency;
  bool serialize_refresh = false;
  bool serialize_flush = false;
  std::uint64_t lines_total = 0;
  std::uint64_t lines_skipped = 0;

  // Request accounting.
  std::uint64_t accesses = 0;
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  double hit_ratio = 0.0;

  // Memory traffic in pages (requests plus maintenance).
  std::uint64_t dram_reads = 0;
  std::uint64_t dram_writes = 0;
  std::uint64_t pja_reads = 0;
  std::uint64_t pja_writes = 0;
  std::uint64_t storage_reads = 0;
  std::uint64_t storage_writes = 0;
  std::uint64_t storage_read_bytes = 0;
  std::uint64_t storage_write_bytes = 0;
  std::uint64_t pja_write_bytes = 0;

  // Storage-write provenance and maintenance counters.
  std::uint64_t flushes_pja_eviction = 0;
  std::uint64_t flushes_dram_eviction = 0;
  std::uint64_t flushes_timer = 0;
  std::uint64_t refreshed_pages = 0;
  std::uint64_t skipped_refreshes = 0;
  std::uint64_t timer_events = 0;
  std::uint64_t entries_scanned = 0;
  std::uint64_t dirty_pages_final = 0;

  // Response-time model.
  double total_response_us = 0.0;
  double mean_response_us = 0.0;
  double max_response_us = 0.0;

  // Idle-interval statistics and the failure model's verdict.
  double max_idle_s = 0.0;
  double mean_idle_s = 0.0;
  FailureSummary failure;

  nlohmann::ordered_json to_json() const;
};

// Folds access outcomes and timer reports into counters and response times.
// Maintenance work (refreshes, timer flushes) always counts as traffic; its
// latency stays off the request path unless the matching serialize flag is
// set, in which case it is charged to the next request as queueing delay.
class MetricsCollector {
 public:
  MetricsCollector(const LatencyModel& latency, bool serialize_refresh, bool serialize_flush);

  void record_access(const PageAccess& a, const AccessOutcome& out);
  void record_timer(const TimerReport& rep);

  // Writes every counter this collector owns into the report.
  void fill(RunReport& report) const;

 private:
  LatencyModel latency_;
  bool serialize_refresh_;
  bool serialize_flush_;
  double pending_delay_us_ = 0.0;

  std::uint64_t accesses_ = 0, reads_ = 0, writes_ = 0, hits_ = 0, misses_ = 0;
  AccessOutcome traffic_;
  std::uint64_t refreshed_pages_ = 0, flushed_pages_ = 0, timer_events_ = 0,
                entries_scanned_ = 0;
  double total_response_us_ = 0.0;
  double max_response_us_ = 0.0;
};

struct ComparisonTable {
  std::vector<std::string> metrics;            // row names
  std::vector<std::string> labels;             // column names (report labels)
  std::vector<std::vector<double>> ratios;     // [metric][report]
  std::vector<std::vector<bool>> flagged_inf;  // nonzero value over a zero baseline
};

// Per-metric ratios against reports[baseline]. A zero-over-zero cell is 1.0;
// a nonzero-over-zero cell is +inf and flagged. Reports must share one trace
// identity; otherwise ConfigError.
ComparisonTable compare(const std::vector<RunReport>& reports, std::size_t baseline);

std::string comparison_csv(const ComparisonTable& table);

}  // namespace nvbsim
