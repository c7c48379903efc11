#include "nvbsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "nvbsim/errors.hpp"

namespace nvbsim {

void LatencyModel::validate() const {
  for (const double v : {dram_read_us, dram_write_us, pja_read_us, pja_write_us,
                         storage_read_us, storage_write_us}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ConfigError("latencies must be finite and >= 0");
    }
  }
}

double LatencyModel::cost_us(const AccessOutcome& out) const {
  return out.dram_reads * dram_read_us + out.dram_writes * dram_write_us +
         out.pja_reads * pja_read_us + out.pja_writes * pja_write_us +
         out.storage_reads * storage_read_us + out.storage_writes * storage_write_us;
}

MetricsCollector::MetricsCollector(const LatencyModel& latency, bool serialize_refresh,
                                   bool serialize_flush)
    : latency_(latency),
      serialize_refresh_(serialize_refresh),
      serialize_flush_(serialize_flush) {
  latency_.validate();
}

void MetricsCollector::record_access(const PageAccess& a, const AccessOutcome& out) {
  ++accesses_;
  if (a.kind == AccessKind::kWrite) {
    ++writes_;
  } else {
    ++reads_;
  }
  if (out.hit == AccessOutcome::Hit::kMiss) {
    ++misses_;
  } else {
    ++hits_;
  }
  traffic_.absorb(out);
  const double response_us = pending_delay_us_ + latency_.cost_us(out);
  pending_delay_us_ = 0.0;
  total_response_us_ += response_us;
  max_response_us_ = std::max(max_response_us_, response_us);
}

void MetricsCollector::record_timer(const TimerReport& rep) {
  ++timer_events_;
  refreshed_pages_ += rep.pages_refreshed;
  flushed_pages_ += rep.pages_flushed;
  entries_scanned_ += rep.entries_scanned;
  traffic_.absorb(rep.work);
  // A serialized maintenance burst delays the next request that arrives.
  const bool charge = (serialize_refresh_ && rep.pages_refreshed > 0) ||
                      (serialize_flush_ && rep.pages_flushed > 0);
  if (charge) pending_delay_us_ += latency_.cost_us(rep.work);
}

void MetricsCollector::fill(RunReport& report) const {
  report.accesses = accesses_;
  report.reads = reads_;
  report.writes = writes_;
  report.hits = hits_;
  report.misses = misses_;
  report.hit_ratio = accesses_ == 0 ? 0.0 : static_cast<double>(hits_) / accesses_;

  report.dram_reads = traffic_.dram_reads;
  report.dram_writes = traffic_.dram_writes;
  report.pja_reads = traffic_.pja_reads;
  report.pja_writes = traffic_.pja_writes;
  report.storage_reads = traffic_.storage_reads;
  report.storage_writes = traffic_.storage_writes;
  const std::uint64_t page_size = report.trace.page_size;
  report.storage_read_bytes = traffic_.storage_reads * page_size;
  report.storage_write_bytes = traffic_.storage_writes * page_size;
  report.pja_write_bytes = traffic_.pja_writes * page_size;

  report.flushes_timer = flushed_pages_;
  report.refreshed_pages = refreshed_pages_;
  report.timer_events = timer_events_;
  report.entries_scanned = entries_scanned_;

  report.total_response_us = total_response_us_;
  report.mean_response_us = accesses_ == 0 ? 0.0 : total_response_us_ / accesses_;
  report.max_response_us = max_response_us_;
}

nlohmann::ordered_json RunReport::to_json() const {
  nlohmann::ordered_json j;
  j["label"] = label;
  j["trace"] = {{"source", trace.source},
                {"accesses", trace.accesses},
                {"page_size", trace.page_size},
                {"start_s", trace.start_s},
                {"end_s", trace.end_s},
                {"lines_total", lines_total},
                {"lines_skipped", lines_skipped}};

  auto& c = j["config"];
  c["mode"] = mode;
  c["c_dram_pages"] = c_dram;
  c["c_pja_pages"] = c_pja;
  c["scheme"] = {{"kind", scheme_name(scheme.kind)},
                 {"timestep_s", scheme.timestep_s},
                 {"pdflush_interval_s", scheme.pdflush_interval_s},
                 {"pdflush_idle_threshold_s", scheme.pdflush_idle_threshold_s},
                 {"conv_period_s", scheme.conv_period_s},
                 {"copa_requeue", scheme.copa_requeue}};
  c["failure_params"] = {{"delta", failure_params.delta},
                         {"k", failure_params.k},
                         {"words_per_page", failure_params.words_per_page},
                         {"p_wf_cell", failure_params.p_wf_cell},
                         {"effective_p_wf_cell", failure_params.effective_p_wf_cell()}};
  if (failure_params.physical.has_value()) {
    const auto& ph = *failure_params.physical;
    c["failure_params"]["physical"] = {{"t_write_s", ph.t_write_s},
                                       {"mu_bohr", ph.mu_bohr},
                                       {"spin_polarization", ph.spin_polarization},
                                       {"i_write", ph.i_write},
                                       {"i_c0", ph.i_c0},
                                       {"euler_c", ph.euler_c},
                                       {"magnetic_moment", ph.magnetic_moment},
                                       {"delta", ph.delta}};
  }
  c["latency_us"] = {{"dram_read", latency.dram_read_us},
                     {"dram_write", latency.dram_write_us},
                     {"pja_read", latency.pja_read_us},
                     {"pja_write", latency.pja_write_us},
                     {"storage_read", latency.storage_read_us},
                     {"storage_write", latency.storage_write_us}};
  c["serialize_refresh"] = serialize_refresh;
  c["serialize_flush"] = serialize_flush;

  j["requests"] = {{"accesses", accesses}, {"reads", reads},   {"writes", writes},
                   {"hits", hits},         {"misses", misses}, {"hit_ratio", hit_ratio}};
  j["traffic"] = {{"dram_reads", dram_reads},
                  {"dram_writes", dram_writes},
                  {"pja_reads", pja_reads},
                  {"pja_writes", pja_writes},
                  {"storage_reads", storage_reads},
                  {"storage_writes", storage_writes},
                  {"storage_read_bytes", storage_read_bytes},
                  {"storage_write_bytes", storage_write_bytes},
                  {"pja_write_bytes", pja_write_bytes}};
  j["maintenance"] = {{"flushes_pja_eviction", flushes_pja_eviction},
                      {"flushes_dram_eviction", flushes_dram_eviction},
                      {"flushes_timer", flushes_timer},
                      {"refreshed_pages", refreshed_pages},
                      {"skipped_refreshes", skipped_refreshes},
                      {"timer_events", timer_events},
                      {"entries_scanned", entries_scanned},
                      {"dirty_pages_final", dirty_pages_final}};
  j["response_us"] = {{"total", total_response_us},
                      {"mean", mean_response_us},
                      {"max", max_response_us}};
  j["idle"] = {{"max_idle_s", max_idle_s},
               {"mean_idle_s", mean_idle_s},
               {"interval_count", failure.interval_count}};
  j["failure"] = {{"retention_loss", failure.retention_loss},
                  {"write_loss", failure.write_loss},
                  {"combined_loss", failure.combined_loss},
                  {"max_interval_s", failure.max_interval_s},
                  {"mean_interval_s", failure.mean_interval_s},
                  {"interval_count", failure.interval_count},
                  {"total_pja_writes", failure.total_pja_writes},
                  {"total_refreshes", failure.total_refreshes},
                  {"pages", failure.pages},
                  {"underflow_clamped", failure.underflow_clamped}};
  return j;
}

namespace {

struct MetricDef {
  const char* name;
  double (*get)(const RunReport&);
};

constexpr MetricDef kCompareMetrics[] = {
    {"hit_ratio", [](const RunReport& r) { return r.hit_ratio; }},
    {"storage_reads", [](const RunReport& r) { return static_cast<double>(r.storage_reads); }},
    {"storage_writes", [](const RunReport& r) { return static_cast<double>(r.storage_writes); }},
    {"storage_write_bytes",
     [](const RunReport& r) { return static_cast<double>(r.storage_write_bytes); }},
    {"pja_writes", [](const RunReport& r) { return static_cast<double>(r.pja_writes); }},
    {"refreshed_pages",
     [](const RunReport& r) { return static_cast<double>(r.refreshed_pages); }},
    {"flushes_timer", [](const RunReport& r) { return static_cast<double>(r.flushes_timer); }},
    {"mean_response_us", [](const RunReport& r) { return r.mean_response_us; }},
    {"max_response_us", [](const RunReport& r) { return r.max_response_us; }},
    {"max_idle_s", [](const RunReport& r) { return r.max_idle_s; }},
    {"retention_loss", [](const RunReport& r) { return r.failure.retention_loss; }},
    {"write_loss", [](const RunReport& r) { return r.failure.write_loss; }},
    {"combined_loss", [](const RunReport& r) { return r.failure.combined_loss; }},
};

}  // namespace

ComparisonTable compare(const std::vector<RunReport>& reports, std::size_t baseline) {
  if (reports.size() < 2) throw ConfigError("compare needs at least two reports");
  if (baseline >= reports.size()) throw ConfigError("baseline index out of range");
  for (const auto& r : reports) {
    if (!(r.trace == reports[baseline].trace)) {
      throw ConfigError("cannot compare reports over different traces (" + r.trace.source +
                        " vs " + reports[baseline].trace.source + ")");
    }
  }
  ComparisonTable t;
  for (const auto& r : reports) t.labels.push_back(r.label);
  for (const auto& m : kCompareMetrics) {
    t.metrics.emplace_back(m.name);
    std::vector<double> row;
    std::vector<bool> flags;
    const double base = m.get(reports[baseline]);
    for (const auto& r : reports) {
      const double v = m.get(r);
      if (base == 0.0) {
        row.push_back(v == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
        flags.push_back(v != 0.0);
      } else {
        row.push_back(v / base);
        flags.push_back(false);
      }
    }
    t.ratios.push_back(std::move(row));
    t.flagged_inf.push_back(std::move(flags));
  }
  return t;
}

std::string comparison_csv(const ComparisonTable& table) {
  std::string out = "metric";
  for (const auto& label : table.labels) out += "," + label;
  out += "\n";
  char buf[64];
  for (std::size_t i = 0; i < table.metrics.size(); ++i) {
    out += table.metrics[i];
    for (std::size_t c = 0; c < table.ratios[i].size(); ++c) {
      if (table.flagged_inf[i][c]) {
        out += ",inf";
      } else {
        std::snprintf(buf, sizeof buf, ",%.17g", table.ratios[i][c]);
        out += buf;
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace nvbsim
