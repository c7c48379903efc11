#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nvbsim/idle_ledger.hpp"
#include "nvbsim/metrics.hpp"
#include "nvbsim/reliability.hpp"
#include "nvbsim/schemes.hpp"
#include "nvbsim/trace_io.hpp"
#include "nvbsim/types.hpp"

namespace nvbsim {

enum class BufferMode : std::uint8_t {
  kNvb,  // DRAM with a journal area mirroring dirty pages
  kHyb,  // DRAM first level, NVM second level
};

const char* mode_name(BufferMode mode);
BufferMode mode_from_name(std::string_view name);  // ConfigError on unknown

struct RunConfig {
  // Trace source: a request file, or a generated stream when use_synthetic.
  std::string trace_path;
  bool use_synthetic = false;
  TraceSpec synth;
  std::uint64_t page_size = 4096;
  std::uint64_t max_accesses = 0;  // 0 = no cap
  bool abort_on_parse_error = false;

  // Defaults mirror an 8 GiB buffer with a 512 MiB journal in 4 KiB pages.
  std::uint64_t c_dram = 2097152;
  std::uint64_t c_pja = 131072;
  BufferMode mode = BufferMode::kNvb;
  SchemeConfig scheme;
  FailureParams failure;
  LatencyModel latency;
  bool serialize_refresh = false;
  bool serialize_flush = false;
  std::string label;  // report label; derived from the scheme when empty

  void validate() const;  // ConfigError on any bad combination
  std::string default_label() const;
};

struct ReplayResult {
  RunReport report;
  IdleLedger ledger;
  std::vector<std::pair<PageId, double>> final_dirty;  // page, last-dirtied time
};

// Drives the configured buffer over an in-memory access stream, merging the
// scheme's timer instants in timestamp order; a timer tied with an access
// fires first. The ledger is finalized at the last access timestamp.
ReplayResult replay_accesses(const std::vector<PageAccess>& accesses, const RunConfig& config);

// Loads the configured trace (file or synthetic) and replays it.
ReplayResult simulate(const RunConfig& config);

}  // namespace nvbsim
