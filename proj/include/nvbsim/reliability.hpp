#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nvbsim/idle_ledger.hpp"

namespace nvbsim {

// Constants for the physical write-failure estimate. All values are caller
// supplied; the repo documents one demonstration set in the README.
struct WriteFailurePhysical {
  double t_write_s = 0.0;
  double mu_bohr = 0.0;          // Bohr magneton
  double spin_polarization = 0.0;
  double i_write = 0.0;
  double i_c0 = 0.0;             // critical switching current
  double euler_c = 0.0;
  double magnetic_moment = 0.0;
  double delta = 0.0;            // thermal stability factor
};

struct FailureParams {
  double delta = 21.0;        // thermal stability factor; comparisons are meant as ratios
  unsigned k = 64;            // bits per ECC word (SEC-DED corrects one of them)
  unsigned words_per_page = 512;
  double p_wf_cell = 1e-8;    // per-cell erroneous-write probability
  std::optional<WriteFailurePhysical> physical;  // overrides p_wf_cell when set

  double effective_p_wf_cell() const;
  void validate() const;  // throws ConfigError
};

// Probability that a single cell flips after t seconds of idleness.
double p_rf_cell(double t_s, double delta);

// Survival probability of one k-bit SEC-DED word at per-cell flip
// probability p: no flips or exactly one flip. Algebraically
// (1-p)^(k-1) * (1 + (k-1)p); evaluated in log space to stay exact for
// p down to the underflow floor.
double word_survival(double p, unsigned k);
double log_word_survival(double p, unsigned k);

// Probability that a page (words_per_page words) loses data after t_s
// seconds of idleness.
double p_dl_rf_page(double t_s, const FailureParams& fp);

// Loss probability across a page's recorded idle intervals, treating the
// intervals as independent exposures.
double p_dl_rf_intervals(std::span<const double> interval_lengths_s, const FailureParams& fp);

// Per-cell write failure from device constants. Clamped to [0,1].
double p_wf_cell_physical(const WriteFailurePhysical& pp);

// Probability that a page loses data over n_writes committed writes.
double p_dl_wf_page(const FailureParams& fp, std::uint64_t n_writes);

struct PageFailure {
  PageId page;
  double retention_loss = 0.0;
  double write_loss = 0.0;
  std::uint64_t interval_count = 0;
  std::uint64_t write_count = 0;
};

struct FailureSummary {
  double retention_loss = 0.0;  // 1 - prod over pages of (1 - per-page retention loss)
  double write_loss = 0.0;
  double combined_loss = 0.0;   // 1 - (1-retention)(1-write)
  double max_interval_s = 0.0;
  double mean_interval_s = 0.0;
  std::uint64_t interval_count = 0;
  std::uint64_t total_pja_writes = 0;
  std::uint64_t total_refreshes = 0;
  std::uint64_t pages = 0;
  bool underflow_clamped = false;  // some probability fell below 1e-300 and reads as 0
};

// Aggregates the whole journal area. Pages are combined in ascending PageId
// order so reports are bit-stable across runs.
FailureSummary aggregate_pja_failure(const IdleLedger& ledger, const FailureParams& fp);

// Per-page detail in ascending PageId order (the calc subcommand's payload).
std::vector<PageFailure> per_page_failures(const IdleLedger& ledger, const FailureParams& fp);

// Values smaller than this are reported as exactly 0 with
// FailureSummary::underflow_clamped set.
inline constexpr double kProbabilityFloor = 1e-300;

}  // namespace nvbsim
