#include "nvbsim/reliability.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nvbsim/errors.hpp"

namespace nvbsim {

namespace {

// Clamp tiny probabilities to 0 per the reporting contract. `exposed` marks
// that the true probability is strictly positive, so a computed 0 means the
// value underflowed inside the log-space fold rather than being exact.
double floor_probability(double p, bool exposed, bool* clamped) {
  if (exposed && p < kProbabilityFloor) {
    if (clamped) *clamped = true;
    return 0.0;
  }
  return p;
}

}  // namespace

double FailureParams::effective_p_wf_cell() const {
  return physical ? p_wf_cell_physical(*physical) : p_wf_cell;
}

void FailureParams::validate() const {
  if (delta <= 0.0) throw ConfigError("delta must be positive");
  if (k < 2) throw ConfigError("word size k must be at least 2 bits");
  if (words_per_page == 0) throw ConfigError("words_per_page must be positive");
  if (!(p_wf_cell >= 0.0 && p_wf_cell <= 1.0))
    throw ConfigError("p_wf_cell must lie in [0,1]");
}

double p_rf_cell(double t_s, double delta) {
  if (t_s < 0.0) throw ConfigError("idle time must be non-negative");
  if (delta <= 0.0) throw ConfigError("delta must be positive");
  // 1 - exp(-t / exp(delta)), kept accurate for t far below the
  // characteristic time.
  return -std::expm1(-t_s * std::exp(-delta));
}

double log_word_survival(double p, unsigned k) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("cell probability must lie in [0,1]");
  if (k < 2) throw ConfigError("word size k must be at least 2 bits");
  if (p == 1.0) return -std::numeric_limits<double>::infinity();
  // (1-p)^k + k p (1-p)^(k-1) factors as (1-p)^(k-1) (1 + (k-1)p), which
  // log1p evaluates without cancellation.
  return double(k - 1) * std::log1p(-p) + std::log1p(double(k - 1) * p);
}

double word_survival(double p, unsigned k) { return std::exp(log_word_survival(p, k)); }

double p_dl_rf_page(double t_s, const FailureParams& fp) {
  fp.validate();
  const double log_s = log_word_survival(p_rf_cell(t_s, fp.delta), fp.k);
  return -std::expm1(double(fp.words_per_page) * log_s);
}

double p_dl_rf_intervals(std::span<const double> interval_lengths_s, const FailureParams& fp) {
  fp.validate();
  double log_survival = 0.0;
  for (double t : interval_lengths_s)
    log_survival += double(fp.words_per_page) * log_word_survival(p_rf_cell(t, fp.delta), fp.k);
  return -std::expm1(log_survival);
}

double p_wf_cell_physical(const WriteFailurePhysical& pp) {
  const double numerator =
      pp.t_write_s * 2.0 * pp.mu_bohr * pp.spin_polarization * (pp.i_write - pp.i_c0);
  const double denominator =
      pp.euler_c + (std::numbers::e * pp.magnetic_moment *
                    (1.0 + pp.spin_polarization * pp.spin_polarization)) *
                       std::log(std::numbers::pi * std::numbers::pi * pp.delta / 4.0);
  if (denominator == 0.0) throw ConfigError("write-failure denominator is zero");
  return std::clamp(std::exp(-numerator / denominator), 0.0, 1.0);
}

double p_dl_wf_page(const FailureParams& fp, std::uint64_t n_writes) {
  fp.validate();
  if (n_writes == 0) return 0.0;
  const double log_s = log_word_survival(fp.effective_p_wf_cell(), fp.k);
  return -std::expm1(double(fp.words_per_page) * double(n_writes) * log_s);
}

std::vector<PageFailure> per_page_failures(const IdleLedger& ledger, const FailureParams& fp) {
  fp.validate();
  std::vector<PageFailure> out;
  for (PageId page : ledger.sorted_pages()) {
    const auto* rec = ledger.find(page);
    PageFailure pf;
    pf.page = page;
    std::vector<double> lengths;
    lengths.reserve(rec->intervals.size());
    for (const auto& iv : rec->intervals) lengths.push_back(iv.length());
    pf.retention_loss = p_dl_rf_intervals(lengths, fp);
    pf.write_loss = p_dl_wf_page(fp, rec->writes);
    pf.interval_count = rec->intervals.size();
    pf.write_count = rec->writes;
    out.push_back(pf);
  }
  return out;
}

FailureSummary aggregate_pja_failure(const IdleLedger& ledger, const FailureParams& fp) {
  fp.validate();
  FailureSummary sum;
  double log_retention_survival = 0.0;
  double log_write_survival = 0.0;
  double interval_total = 0.0;
  bool retention_exposed = false;
  bool write_exposed = false;
  for (PageId page : ledger.sorted_pages()) {
    const auto* rec = ledger.find(page);
    ++sum.pages;
    sum.total_pja_writes += rec->writes;
    sum.total_refreshes += rec->refreshes;
    for (const auto& iv : rec->intervals) {
      ++sum.interval_count;
      interval_total += iv.length();
      sum.max_interval_s = std::max(sum.max_interval_s, iv.length());
      const double p_cell = p_rf_cell(iv.length(), fp.delta);
      retention_exposed |= p_cell > 0.0;
      log_retention_survival += double(fp.words_per_page) * log_word_survival(p_cell, fp.k);
    }
    if (rec->writes > 0) {
      write_exposed |= fp.effective_p_wf_cell() > 0.0;
      log_write_survival += double(fp.words_per_page) * double(rec->writes) *
                            log_word_survival(fp.effective_p_wf_cell(), fp.k);
    }
  }
  sum.mean_interval_s = sum.interval_count ? interval_total / double(sum.interval_count) : 0.0;
  sum.retention_loss = floor_probability(-std::expm1(log_retention_survival), retention_exposed,
                                         &sum.underflow_clamped);
  sum.write_loss =
      floor_probability(-std::expm1(log_write_survival), write_exposed, &sum.underflow_clamped);
  sum.combined_loss =
      floor_probability(-std::expm1(log_retention_survival + log_write_survival),
                        retention_exposed || write_exposed, &sum.underflow_clamped);
  return sum;
}

}  // namespace nvbsim
