#include "nvbsim/replay.hpp"

#include <cstdio>
#include <string>

#include "nvbsim/buffer_core.hpp"
#include "nvbsim/errors.hpp"

namespace nvbsim {

const char* mode_name(BufferMode mode) {
  switch (mode) {
    case BufferMode::kNvb: return "nvb";
    case BufferMode::kHyb: return "hyb";
  }
  throw InternalError("unknown buffer mode");
}

BufferMode mode_from_name(std::string_view name) {
  if (name == "nvb") return BufferMode::kNvb;
  if (name == "hyb") return BufferMode::kHyb;
  throw ConfigError("unknown buffer mode: " + std::string(name));
}

void RunConfig::validate() const {
  if (c_dram < 1 || c_pja < 1) throw ConfigError("capacities must be >= 1 page");
  if (page_size == 0 || (page_size & (page_size - 1)) != 0) {
    throw ConfigError("page_size must be a power of two");
  }
  if (mode == BufferMode::kHyb && scheme.kind != SchemeKind::kNoPdflush) {
    throw ConfigError("hyb mode runs without flush or refresh timers (no_pdflush only)");
  }
  if (use_synthetic) {
    synth.validate();
  } else if (trace_path.empty()) {
    throw ConfigError("no trace source: set a trace path or a synthetic spec");
  }
  scheme.validate();
  failure.validate();
  latency.validate();
}

std::string RunConfig::default_label() const {
  char buf[64];
  switch (scheme.kind) {
    case SchemeKind::kCopa:
      std::snprintf(buf, sizeof buf, "copa_T%g", scheme.timestep_s);
      return buf;
    case SchemeKind::kConvScheme:
      std::snprintf(buf, sizeof buf, "conv_P%g", scheme.conv_period_s);
      return buf;
    default: return scheme_name(scheme.kind);
  }
}

namespace {

std::string synth_descriptor(const TraceSpec& s) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "synth:%s:n=%llu:u=%llu:wf=%g:ia=%g:exp=%d:theta=%g:seed=%llu",
                pattern_name(s.pattern).c_str(), static_cast<unsigned long long>(s.access_count),
                static_cast<unsigned long long>(s.page_universe), s.write_fraction,
                s.interarrival_s, s.exponential_interarrival ? 1 : 0, s.zipf_theta,
                static_cast<unsigned long long>(s.seed));
  return buf;
}

TraceIdentity make_identity(const RunConfig& config, const std::vector<PageAccess>& accesses) {
  TraceIdentity id;
  id.source = config.use_synthetic ? synth_descriptor(config.synth) : config.trace_path;
  id.accesses = accesses.size();
  id.page_size = config.page_size;
  if (!accesses.empty()) {
    id.start_s = accesses.front().timestamp_s;
    id.end_s = accesses.back().timestamp_s;
  }
  return id;
}

}  // namespace

ReplayResult replay_accesses(const std::vector<PageAccess>& accesses, const RunConfig& config) {
  config.validate();
  ReplayResult res;
  RunReport& rep = res.report;
  rep.label = config.label.empty() ? config.default_label() : config.label;
  rep.trace = make_identity(config, accesses);
  rep.mode = mode_name(config.mode);
  rep.c_dram = config.c_dram;
  rep.c_pja = config.c_pja;
  rep.scheme = config.scheme;
  rep.failure_params = config.failure;
  rep.latency = config.latency;
  rep.serialize_refresh = config.serialize_refresh;
  rep.serialize_flush = config.serialize_flush;

  MetricsCollector mets(config.latency, config.serialize_refresh, config.serialize_flush);
  const double end_s = accesses.empty() ? 0.0 : accesses.back().timestamp_s;

  if (config.mode == BufferMode::kNvb) {
    NvbBuffer buf(config.c_dram, config.c_pja, &res.ledger);
    auto scheme = make_scheme(config.scheme);
    if (scheme != nullptr) {
      BufferEvents ev;
      ev.on_pja_write = [&s = *scheme](PageId p) { s.note_pja_write(p); };
      ev.on_dirty_eviction = [&s = *scheme](PageId p) { s.note_dirty_eviction(p); };
      buf.set_events(std::move(ev));
    }
    const auto timers = schedule_timers(config.scheme, end_s);
    std::size_t ti = 0;
    for (const PageAccess& a : accesses) {
      while (ti < timers.size() && timers[ti] <= a.timestamp_s) {
        mets.record_timer(scheme->on_timer(buf, timers[ti]));
        ++ti;
      }
      mets.record_access(a, buf.access(a));
    }
    NVB_CHECK(ti == timers.size(), "timers past the end of the trace");
    res.ledger.finalize(end_s);
    res.final_dirty = buf.snapshot_dirty_set();
    rep.flushes_pja_eviction = buf.flushes_pja_eviction();
    rep.flushes_dram_eviction = buf.flushes_dram_eviction();
    rep.skipped_refreshes = buf.skipped_refreshes();
    mets.fill(rep);
    NVB_CHECK(rep.storage_writes == buf.flushes_pja_eviction() + buf.flushes_dram_eviction() +
                                        buf.flushes_explicit(),
              "storage writes must equal the flush breakdown");
    NVB_CHECK(rep.flushes_timer == buf.flushes_explicit(),
              "timer flush count must match the buffer's explicit flushes");
    buf.validate();
  } else {
    HybBuffer buf(config.c_dram, config.c_pja, &res.ledger);
    for (const PageAccess& a : accesses) {
      mets.record_access(a, buf.access(a));
    }
    res.ledger.finalize(end_s);
    res.final_dirty = buf.snapshot_dirty_set();
    mets.fill(rep);
    buf.validate();
  }

  NVB_CHECK(rep.hits + rep.misses == rep.accesses, "hit and miss counts must cover every access");
  rep.dirty_pages_final = res.final_dirty.size();
  rep.failure = aggregate_pja_failure(res.ledger, config.failure);
  rep.max_idle_s = rep.failure.max_interval_s;
  rep.mean_idle_s = rep.failure.mean_interval_s;
  return res;
}

ReplayResult simulate(const RunConfig& config) {
  config.validate();
  if (config.use_synthetic) {
    RunConfig effective = config;
    if (config.max_accesses != 0 && config.max_accesses < effective.synth.access_count) {
      effective.synth.access_count = config.max_accesses;
    }
    return replay_accesses(generate_synthetic(effective.synth), effective);
  }
  TraceLoadOptions opts;
  opts.page_size = config.page_size;
  opts.abort_on_parse_error = config.abort_on_parse_error;
  opts.max_accesses = config.max_accesses;
  const TraceLoadResult loaded = load_msrc_trace(config.trace_path, opts);
  ReplayResult res = replay_accesses(loaded.accesses, config);
  res.report.lines_total = loaded.lines_total;
  res.report.lines_skipped = loaded.lines_skipped;
  return res;
}

}  // namespace nvbsim
