// Command-line front end: single runs, scheme/trace grids, standalone
// failure-model evaluation, and synthetic trace generation.
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nvbsim/errors.hpp"
#include "nvbsim/idle_ledger.hpp"
#include "nvbsim/metrics.hpp"
#include "nvbsim/reliability.hpp"
#include "nvbsim/replay.hpp"
#include "nvbsim/schemes.hpp"
#include "nvbsim/trace_io.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace nvbsim;

namespace {

// Exit codes: 0 ok, 1 configuration error, 2 I/O or input-data error,
// 3 violated internal invariant.
int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) != nullptr) return 1;
  if (dynamic_cast<const IoError*>(&e) != nullptr) return 2;
  if (dynamic_cast<const ParseError*>(&e) != nullptr) return 2;
  return 3;
}

std::string join_out(const std::string& out_dir, const std::string& path) {
  if (path.empty() || path == "-") return path;
  fs::path p(path);
  if (p.is_absolute() || out_dir.empty()) return path;
  return (fs::path(out_dir) / p).string();
}

void write_text_file(const std::string& path, const std::string& content) {
  fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + p.parent_path().string());
  }
  std::ofstream f(p, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << content;
  f.flush();
  if (!f) throw IoError("short write to " + path);
}

void emit(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::fputs(content.c_str(), stdout);
  } else {
    write_text_file(path, content);
  }
}

// Options shared by the run and grid subcommands. Scheme/mode/pattern names
// are parsed as strings and materialized after CLI11 finishes.
struct CommonOpts {
  RunConfig cfg;
  std::string mode = "nvb";
  std::string scheme = "no_pdflush";
  std::string pattern = "uniform";
  bool synth = false;
  bool no_requeue = false;
  WriteFailurePhysical physical;
  CLI::Option* physical_opts[8] = {};

  void add_trace_options(CLI::App* cmd, bool multi_trace_paths,
                         std::vector<std::string>* trace_paths) {
    if (multi_trace_paths) {
      cmd->add_option("--trace", *trace_paths, "Request trace file(s), CSV or CSV.gz")
          ->delimiter(',');
    } else {
      cmd->add_option("--trace", cfg.trace_path, "Request trace file, CSV or CSV.gz");
    }
    cmd->add_flag("--synth", synth, "Replay a generated trace instead of a file");
    add_spec_options(cmd, &cfg.synth);
    cmd->add_option("--page-size", cfg.page_size, "Page size in bytes (power of two)")
        ->capture_default_str();
    cmd->add_option("--max-accesses", cfg.max_accesses,
                    "Stop after this many page accesses (0 = whole trace)")
        ->capture_default_str();
    cmd->add_flag("--abort-on-parse-error", cfg.abort_on_parse_error,
                  "Fail on the first malformed trace line instead of skipping");
  }

  void add_spec_options(CLI::App* cmd, TraceSpec* spec) {
    const char* g = "Synthetic trace";
    cmd->add_option("--synth-count", spec->access_count, "Accesses to generate")
        ->group(g)->capture_default_str();
    cmd->add_option("--synth-universe", spec->page_universe, "Distinct pages")
        ->group(g)->capture_default_str();
    cmd->add_option("--synth-pattern", pattern, "sequential|uniform|zipf")
        ->group(g)->capture_default_str();
    cmd->add_option("--synth-zipf-theta", spec->zipf_theta, "Zipf skew")
        ->group(g)->capture_default_str();
    cmd->add_option("--synth-write-fraction", spec->write_fraction, "Write share in [0,1]")
        ->group(g)->capture_default_str();
    cmd->add_option("--synth-interarrival", spec->interarrival_s,
                    "Gap between requests in seconds (mean when exponential)")
        ->group(g)->capture_default_str();
    cmd->add_flag("--synth-exponential", spec->exponential_interarrival,
                  "Draw interarrival gaps from an exponential distribution")
        ->group(g);
    cmd->add_option("--synth-seed", spec->seed, "Generator seed")
        ->group(g)->capture_default_str();
  }

  void add_sim_options(CLI::App* cmd) {
    cmd->add_option("--c-dram", cfg.c_dram, "Buffer capacity in pages")
        ->capture_default_str();
    cmd->add_option("--c-pja", cfg.c_pja, "Journal (or second-level) capacity in pages")
        ->capture_default_str();
    cmd->add_option("--mode", mode, "nvb|hyb")->capture_default_str();
    cmd->add_option("--timestep", cfg.scheme.timestep_s,
                    "Distant-refreshing time-step T in seconds")
        ->capture_default_str();
    cmd->add_option("--pdflush-interval", cfg.scheme.pdflush_interval_s,
                    "Flush timer period in seconds")
        ->capture_default_str();
    cmd->add_option("--pdflush-threshold", cfg.scheme.pdflush_idle_threshold_s,
                    "Idle seconds before a dirty page is flushed")
        ->capture_default_str();
    cmd->add_option("--conv-period", cfg.scheme.conv_period_s,
                    "Conventional refresh period in seconds")
        ->capture_default_str();
    cmd->add_flag("--no-copa-requeue", no_requeue,
                  "Do not re-track refreshed pages; each page is refreshed once "
                  "per write");
    cmd->add_flag("--serialize-refresh", cfg.serialize_refresh,
                  "Charge refresh latency to the next request");
    cmd->add_flag("--serialize-flush", cfg.serialize_flush,
                  "Charge timer-flush latency to the next request");
    add_failure_options(cmd, &cfg.failure);
    add_latency_options(cmd);
  }

  void add_failure_options(CLI::App* cmd, FailureParams* fp) {
    const char* g = "Failure model";
    cmd->add_option("--delta", fp->delta, "Thermal stability factor")
        ->group(g)->capture_default_str();
    cmd->add_option("--ecc-k", fp->k, "Bits per ECC word")->group(g)->capture_default_str();
    cmd->add_option("--words-per-page", fp->words_per_page, "ECC words per page")
        ->group(g)->capture_default_str();
    cmd->add_option("--p-wf-cell", fp->p_wf_cell, "Per-cell write-failure probability")
        ->group(g)->capture_default_str();
    const char* pg = "Physical write failure (set all eight to override --p-wf-cell)";
    physical_opts[0] = cmd->add_option("--wf-t-write", physical.t_write_s, "Write pulse width, s")->group(pg);
    physical_opts[1] = cmd->add_option("--wf-mu-bohr", physical.mu_bohr, "Bohr magneton")->group(pg);
    physical_opts[2] = cmd->add_option("--wf-spin-polarization", physical.spin_polarization,
                                       "Spin polarization")->group(pg);
    physical_opts[3] = cmd->add_option("--wf-i-write", physical.i_write, "Write current")->group(pg);
    physical_opts[4] = cmd->add_option("--wf-i-c0", physical.i_c0, "Critical switching current")->group(pg);
    physical_opts[5] = cmd->add_option("--wf-euler-c", physical.euler_c, "Euler constant term")->group(pg);
    physical_opts[6] = cmd->add_option("--wf-magnetic-moment", physical.magnetic_moment,
                                       "Magnetic moment")->group(pg);
    physical_opts[7] = cmd->add_option("--wf-delta", physical.delta,
                                       "Thermal stability factor for writes")->group(pg);
  }

  void add_latency_options(CLI::App* cmd) {
    const char* g = "Latency model (µs per 4 KiB page)";
    cmd->add_option("--dram-read-us", cfg.latency.dram_read_us, "")->group(g)->capture_default_str();
    cmd->add_option("--dram-write-us", cfg.latency.dram_write_us, "")->group(g)->capture_default_str();
    cmd->add_option("--pja-read-us", cfg.latency.pja_read_us, "")->group(g)->capture_default_str();
    cmd->add_option("--pja-write-us", cfg.latency.pja_write_us, "")->group(g)->capture_default_str();
    cmd->add_option("--storage-read-us", cfg.latency.storage_read_us, "")->group(g)->capture_default_str();
    cmd->add_option("--storage-write-us", cfg.latency.storage_write_us, "")->group(g)->capture_default_str();
  }

  // Folds the string-typed options into the config. Called after parsing.
  void materialize() {
    cfg.mode = mode_from_name(mode);
    cfg.scheme.kind = scheme_from_name(scheme);
    cfg.synth.pattern = pattern_from_name(pattern);
    cfg.use_synthetic = synth;
    cfg.scheme.copa_requeue = !no_requeue;
    int set_count = 0;
    for (const auto* opt : physical_opts) {
      if (opt != nullptr && opt->count() > 0) ++set_count;
    }
    if (set_count == 8) {
      cfg.failure.physical = physical;
    } else if (set_count > 0) {
      throw ConfigError("physical write-failure constants need all eight --wf-* options");
    }
  }
};

ordered_json failure_json(const FailureSummary& s) {
  return ordered_json{{"retention_loss", s.retention_loss},
                      {"write_loss", s.write_loss},
                      {"combined_loss", s.combined_loss},
                      {"max_interval_s", s.max_interval_s},
                      {"mean_interval_s", s.mean_interval_s},
                      {"interval_count", s.interval_count},
                      {"total_pja_writes", s.total_pja_writes},
                      {"total_refreshes", s.total_refreshes},
                      {"pages", s.pages},
                      {"underflow_clamped", s.underflow_clamped}};
}

// ---------------------------------------------------------------- run ----

struct RunCmd {
  CommonOpts common;
  std::string out_dir;
  std::string report_path = "-";
  std::string intervals_path;
  std::string writes_path;

  int execute() {
    common.materialize();
    const ReplayResult res = simulate(common.cfg);
    emit(join_out(out_dir, report_path), res.report.to_json().dump(2) + "\n");
    if (!intervals_path.empty()) {
      write_intervals_csv(res.ledger, join_out(out_dir, intervals_path));
    }
    if (!writes_path.empty()) {
      write_writes_csv(res.ledger, join_out(out_dir, writes_path));
    }
    return 0;
  }
};

// --------------------------------------------------------------- grid ----

struct TraceSource {
  std::string stem;   // row name in plot tables and report file names
  RunConfig base;     // trace-source fields set; scheme fields overwritten per cell
  std::vector<PageAccess> accesses;
  std::uint64_t lines_total = 0;
  std::uint64_t lines_skipped = 0;
};

struct GridCell {
  std::size_t trace_idx = 0;
  RunConfig cfg;
  std::string status = "pending";  // ok | error | skipped
  std::string error;
  int error_code = 0;
  RunReport report;
};

struct GridCmd {
  CommonOpts common;
  std::vector<std::string> trace_paths;
  std::vector<std::string> schemes{"no_pdflush", "copa"};
  std::vector<double> copa_timesteps{30.0};
  std::vector<double> conv_periods{60.0};
  std::string out_dir = ".";
  unsigned jobs = 0;

  std::vector<TraceSource> load_traces() const {
    std::vector<TraceSource> traces;
    for (const auto& path : trace_paths) {
      TraceSource t;
      t.stem = fs::path(path).stem().string();
      if (t.stem.ends_with(".csv")) t.stem = t.stem.substr(0, t.stem.size() - 4);
      t.base = common.cfg;
      t.base.use_synthetic = false;
      t.base.trace_path = path;
      TraceLoadOptions opts;
      opts.page_size = common.cfg.page_size;
      opts.abort_on_parse_error = common.cfg.abort_on_parse_error;
      opts.max_accesses = common.cfg.max_accesses;
      TraceLoadResult loaded = load_msrc_trace(path, opts);
      t.accesses = std::move(loaded.accesses);
      t.lines_total = loaded.lines_total;
      t.lines_skipped = loaded.lines_skipped;
      traces.push_back(std::move(t));
    }
    if (common.synth) {
      TraceSource t;
      t.base = common.cfg;
      t.base.use_synthetic = true;
      if (t.base.max_accesses != 0 &&
          t.base.max_accesses < t.base.synth.access_count) {
        t.base.synth.access_count = t.base.max_accesses;
      }
      char stem[64];
      std::snprintf(stem, sizeof stem, "synth_%s_seed%llu",
                    pattern_name(t.base.synth.pattern).c_str(),
                    static_cast<unsigned long long>(t.base.synth.seed));
      t.stem = stem;
      t.accesses = generate_synthetic(t.base.synth);
      traces.push_back(std::move(t));
    }
    if (traces.empty()) throw ConfigError("grid needs --trace file(s) and/or --synth");
    return traces;
  }

  std::vector<SchemeConfig> scheme_variants() const {
    if (schemes.empty()) throw ConfigError("grid needs at least one scheme");
    std::vector<SchemeConfig> out;
    for (const auto& name : schemes) {
      SchemeConfig sc = common.cfg.scheme;
      sc.kind = scheme_from_name(name);
      switch (sc.kind) {
        case SchemeKind::kCopa:
          for (const double t : copa_timesteps) {
            sc.timestep_s = t;
            out.push_back(sc);
          }
          break;
        case SchemeKind::kConvScheme:
          for (const double p : conv_periods) {
            sc.conv_period_s = p;
            out.push_back(sc);
          }
          break;
        default: out.push_back(sc); break;
      }
    }
    return out;
  }

  int execute() {
    common.materialize();
    const auto traces = load_traces();
    const auto variants = scheme_variants();

    std::vector<GridCell> cells;
    for (std::size_t ti = 0; ti < traces.size(); ++ti) {
      for (const auto& sc : variants) {
        GridCell cell;
        cell.trace_idx = ti;
        cell.cfg = traces[ti].base;
        cell.cfg.scheme = sc;
        cell.cfg.label.clear();
        cells.push_back(std::move(cell));
      }
    }

    // Cells are independent; run them on a small pool and stop claiming new
    // work after the first failure.
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    const unsigned n_workers =
        std::max(1u, jobs != 0 ? jobs : std::thread::hardware_concurrency());
    auto worker = [&] {
      while (!failed.load()) {
        const std::size_t i = next.fetch_add(1);
        if (i >= cells.size()) return;
        GridCell& cell = cells[i];
        try {
          ReplayResult res = replay_accesses(traces[cell.trace_idx].accesses, cell.cfg);
          res.report.lines_total = traces[cell.trace_idx].lines_total;
          res.report.lines_skipped = traces[cell.trace_idx].lines_skipped;
          cell.report = std::move(res.report);
          cell.status = "ok";
        } catch (const std::exception& e) {
          cell.status = "error";
          cell.error = e.what();
          cell.error_code = exit_code_for(e);
          failed.store(true);
        }
      }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (auto& cell : cells) {
      if (cell.status == "pending") cell.status = "skipped";
    }

    // All file output happens on this thread, cells in declaration order.
    ordered_json manifest;
    manifest["cells"] = ordered_json::array();
    int first_error = 0;
    std::size_t completed = 0;
    for (const auto& cell : cells) {
      ordered_json entry;
      entry["trace"] = traces[cell.trace_idx].stem;
      entry["label"] = cell.cfg.label.empty() ? cell.cfg.default_label() : cell.cfg.label;
      entry["status"] = cell.status;
      if (cell.status == "ok") {
        const std::string rel =
            "reports/" + traces[cell.trace_idx].stem + "__" + cell.report.label + ".json";
        write_text_file(join_out(out_dir, rel), cell.report.to_json().dump(2) + "\n");
        entry["report"] = rel;
        ++completed;
      } else if (cell.status == "error") {
        entry["error"] = cell.error;
        if (first_error == 0) first_error = cell.error_code;
      }
      manifest["cells"].push_back(std::move(entry));
    }
    manifest["completed"] = completed;
    manifest["total"] = cells.size();

    // Per-trace ratio tables against the first no-timer cell (or cell 0).
    const std::size_t per_trace = variants.size();
    for (std::size_t ti = 0; ti < traces.size(); ++ti) {
      std::vector<RunReport> reports;
      bool all_ok = true;
      for (std::size_t vi = 0; vi < per_trace; ++vi) {
        const GridCell& cell = cells[ti * per_trace + vi];
        all_ok = all_ok && cell.status == "ok";
        if (all_ok) reports.push_back(cell.report);
      }
      if (!all_ok || reports.size() < 2) continue;
      std::size_t baseline = 0;
      for (std::size_t vi = 0; vi < reports.size(); ++vi) {
        if (reports[vi].scheme.kind == SchemeKind::kNoPdflush) {
          baseline = vi;
          break;
        }
      }
      write_text_file(join_out(out_dir, "compare__" + traces[ti].stem + ".csv"),
                      comparison_csv(compare(reports, baseline)));
    }

    // Plot tables: one row per trace, one column per scheme cell.
    struct PlotDef {
      const char* file;
      double (*get)(const RunReport&);
    };
    const PlotDef plots[] = {
        {"failure_rate.csv", [](const RunReport& r) { return r.failure.combined_loss; }},
        {"max_idle_time.csv", [](const RunReport& r) { return r.max_idle_s; }},
        {"response_time.csv", [](const RunReport& r) { return r.mean_response_us; }},
        {"refreshed_pages.csv",
         [](const RunReport& r) { return static_cast<double>(r.refreshed_pages); }},
        {"storage_traffic.csv",
         [](const RunReport& r) { return static_cast<double>(r.storage_write_bytes); }},
        {"hit_ratio.csv", [](const RunReport& r) { return r.hit_ratio; }},
    };
    for (const auto& plot : plots) {
      std::string csv = "trace";
      for (std::size_t vi = 0; vi < per_trace; ++vi) {
        csv += "," + (cells[vi].cfg.label.empty() ? cells[vi].cfg.default_label()
                                                  : cells[vi].cfg.label);
      }
      csv += "\n";
      bool any_row = false;
      for (std::size_t ti = 0; ti < traces.size(); ++ti) {
        bool all_ok = true;
        for (std::size_t vi = 0; vi < per_trace; ++vi) {
          all_ok = all_ok && cells[ti * per_trace + vi].status == "ok";
        }
        if (!all_ok) continue;
        any_row = true;
        csv += traces[ti].stem;
        char buf[64];
        for (std::size_t vi = 0; vi < per_trace; ++vi) {
          std::snprintf(buf, sizeof buf, ",%.17g", plot.get(cells[ti * per_trace + vi].report));
          csv += buf;
        }
        csv += "\n";
      }
      if (any_row) write_text_file(join_out(out_dir, plot.file), csv);
    }

    write_text_file(join_out(out_dir, "manifest.json"), manifest.dump(2) + "\n");
    if (first_error != 0) {
      std::fprintf(stderr, "grid aborted; see %s\n",
                   join_out(out_dir, "manifest.json").c_str());
      return first_error;
    }
    return 0;
  }
};

// --------------------------------------------------------------- calc ----

struct CalcCmd {
  CommonOpts common;  // only the failure-model options are registered
  std::string intervals_path;
  std::string writes_path;
  std::string out_dir;
  std::string report_path = "-";

  int execute() {
    common.materialize();
    IdleLedger ledger;
    read_intervals_csv(ledger, intervals_path);
    if (!writes_path.empty()) read_writes_csv(ledger, writes_path);
    common.cfg.failure.validate();
    const FailureSummary summary = aggregate_pja_failure(ledger, common.cfg.failure);
    ordered_json j;
    j["summary"] = failure_json(summary);
    j["pages"] = ordered_json::array();
    for (const PageFailure& pf : per_page_failures(ledger, common.cfg.failure)) {
      j["pages"].push_back(ordered_json{{"disk", pf.page.disk()},
                                        {"index", pf.page.index()},
                                        {"retention_loss", pf.retention_loss},
                                        {"write_loss", pf.write_loss},
                                        {"interval_count", pf.interval_count},
                                        {"write_count", pf.write_count}});
    }
    emit(join_out(out_dir, report_path), j.dump(2) + "\n");
    return 0;
  }
};

// -------------------------------------------------------------- synth ----

struct SynthCmd {
  CommonOpts common;
  std::string out_dir;
  std::string out_path;

  int execute() {
    common.cfg.synth.pattern = pattern_from_name(common.pattern);
    common.cfg.synth.validate();
    write_synthetic_csv(common.cfg.synth, common.cfg.page_size, join_out(out_dir, out_path));
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-driven simulator for DRAM buffers journaled in NVM"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a TOML/INI file");

  RunCmd run;
  CLI::App* run_cmd = app.add_subcommand("run", "Replay one trace under one scheme");
  run.common.add_trace_options(run_cmd, false, nullptr);
  run.common.add_sim_options(run_cmd);
  run_cmd->add_option("--scheme", run.common.scheme,
                      "no_pdflush|baseline|conv|copa")->capture_default_str();
  run_cmd->add_option("--label", run.common.cfg.label, "Report label");
  run_cmd->add_option("--out-dir", run.out_dir, "Directory for relative output paths")
      ->envname("NVBSIM_OUT_DIR");
  run_cmd->add_option("--report", run.report_path, "Report JSON path ('-' = stdout)")
      ->capture_default_str();
  run_cmd->add_option("--intervals-csv", run.intervals_path, "Export idle intervals");
  run_cmd->add_option("--writes-csv", run.writes_path, "Export per-page write counts");

  GridCmd grid;
  CLI::App* grid_cmd =
      app.add_subcommand("grid", "Replay trace(s) under several schemes and compare");
  grid.common.add_trace_options(grid_cmd, true, &grid.trace_paths);
  grid.common.add_sim_options(grid_cmd);
  grid_cmd->add_option("--schemes", grid.schemes, "Schemes to run (comma separated)")
      ->delimiter(',')->capture_default_str();
  grid_cmd->add_option("--copa-timesteps", grid.copa_timesteps,
                       "One cell per value when copa is listed")
      ->delimiter(',')->capture_default_str();
  grid_cmd->add_option("--conv-periods", grid.conv_periods,
                       "One cell per value when conv is listed")
      ->delimiter(',')->capture_default_str();
  grid_cmd->add_option("--jobs", grid.jobs, "Worker threads (0 = hardware)")
      ->capture_default_str();
  grid_cmd->add_option("--out-dir", grid.out_dir, "Output directory")
      ->envname("NVBSIM_OUT_DIR")->capture_default_str();

  CalcCmd calc;
  CLI::App* calc_cmd =
      app.add_subcommand("calc", "Evaluate the failure model on an exported ledger");
  calc_cmd->add_option("--intervals", calc.intervals_path, "Idle-interval CSV")->required();
  calc_cmd->add_option("--writes", calc.writes_path, "Per-page write-count CSV");
  calc.common.add_failure_options(calc_cmd, &calc.common.cfg.failure);
  calc_cmd->add_option("--out-dir", calc.out_dir, "Directory for relative output paths")
      ->envname("NVBSIM_OUT_DIR");
  calc_cmd->add_option("--report", calc.report_path, "Report JSON path ('-' = stdout)")
      ->capture_default_str();

  SynthCmd synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic trace file");
  synth.common.add_spec_options(synth_cmd, &synth.common.cfg.synth);
  synth_cmd->add_option("--page-size", synth.common.cfg.page_size,
                        "Page size used for offsets/lengths")->capture_default_str();
  synth_cmd->add_option("--out-dir", synth.out_dir, "Directory for relative output paths")
      ->envname("NVBSIM_OUT_DIR");
  synth_cmd->add_option("--out", synth.out_path, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;  // --help and --version exit cleanly
  }

  try {
    if (run_cmd->parsed()) return run.execute();
    if (grid_cmd->parsed()) return grid.execute();
    if (calc_cmd->parsed()) return calc.execute();
    if (synth_cmd->parsed()) return synth.execute();
    throw ConfigError("no subcommand given");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  }
}
