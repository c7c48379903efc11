#include "nvbsim/trace_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "nvbsim/errors.hpp"

namespace nvbsim {

namespace {

constexpr double kTicksPerSecond = 1e7;  // FILETIME resolution, 100 ns

std::uint64_t parse_u64(std::string_view field, std::uint64_t line_no, const char* what) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw ParseError(line_no, std::string("bad ") + what + " field");
  return value;
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

}  // namespace

Request RawRequest::to_request(std::uint64_t epoch_ticks) const {
  Request r;
  r.timestamp_s = double(timestamp_ticks - epoch_ticks) / kTicksPerSecond;
  r.disk = disk;
  r.kind = kind;
  r.offset_bytes = offset_bytes;
  r.size_bytes = size_bytes;
  r.response_time_us = response_time_us;
  return r;
}

RawRequest parse_msrc_raw(std::string_view line, std::uint64_t line_no) {
  // Strip a trailing carriage return so CRLF traces parse unmodified.
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

  std::array<std::string_view, 7> fields;
  std::size_t n = 0;
  while (n < fields.size()) {
    const auto comma = line.find(',');
    fields[n++] = line.substr(0, comma);
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  if (n != 7 || line.find(',') != std::string_view::npos)
    throw ParseError(line_no, "expected 7 comma-separated fields");

  RawRequest raw;
  raw.timestamp_ticks = parse_u64(fields[0], line_no, "timestamp");
  raw.disk = static_cast<std::uint32_t>(parse_u64(fields[2], line_no, "disk"));
  if (iequals(fields[3], "Read"))
    raw.kind = AccessKind::kRead;
  else if (iequals(fields[3], "Write"))
    raw.kind = AccessKind::kWrite;
  else
    throw ParseError(line_no, "request type must be Read or Write");
  raw.offset_bytes = parse_u64(fields[4], line_no, "offset");
  raw.size_bytes = parse_u64(fields[5], line_no, "size");
  raw.response_time_us = parse_u64(fields[6], line_no, "response time");
  return raw;
}

Request parse_msrc_line(std::string_view line, std::uint64_t epoch_ticks,
                        std::uint64_t line_no) {
  return parse_msrc_raw(line, line_no).to_request(epoch_ticks);
}

std::vector<PageAccess> expand_to_pages(const Request& req, std::uint64_t page_size) {
  if (page_size == 0 || (page_size & (page_size - 1)) != 0)
    throw ConfigError("page_size must be a power of two");
  std::vector<PageAccess> out;
  if (req.size_bytes == 0) return out;
  const std::uint64_t first = req.offset_bytes / page_size;
  const std::uint64_t last = (req.offset_bytes + req.size_bytes - 1) / page_size;
  out.reserve(last - first + 1);
  for (std::uint64_t idx = first; idx <= last; ++idx)
    out.push_back({req.timestamp_s, PageId(req.disk, idx), req.kind});
  return out;
}

TraceLoadResult load_msrc_trace(const std::string& path, const TraceLoadOptions& opt) {
  // gzopen reads plain files as-is and inflates gzip ones, sniffing the
  // 0x1f 0x8b magic itself.
  gzFile gz = gzopen(path.c_str(), "rb");
  if (gz == nullptr) throw IoError("cannot open trace " + path);

  TraceLoadResult res;
  std::vector<RawRequest> raws;
  std::string pending;
  std::array<char, 1 << 16> chunk;
  std::uint64_t line_no = 0;

  auto consume_line = [&](std::string_view line) {
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) return;
    ++line_no;
    ++res.lines_total;
    try {
      raws.push_back(parse_msrc_raw(line, line_no));
    } catch (const ParseError&) {
      if (opt.abort_on_parse_error) {
        gzclose(gz);
        throw;
      }
      ++res.lines_skipped;
    }
  };

  for (;;) {
    const int got = gzread(gz, chunk.data(), chunk.size());
    if (got < 0) {
      gzclose(gz);
      throw IoError("read error in trace " + path);
    }
    if (got == 0) break;
    std::string_view buf(chunk.data(), static_cast<std::size_t>(got));
    for (;;) {
      const auto nl = buf.find('\n');
      if (nl == std::string_view::npos) {
        pending.append(buf);
        break;
      }
      if (pending.empty()) {
        consume_line(buf.substr(0, nl));
      } else {
        pending.append(buf.substr(0, nl));
        consume_line(pending);
        pending.clear();
      }
      buf.remove_prefix(nl + 1);
    }
  }
  gzclose(gz);
  if (!pending.empty()) consume_line(pending);

  res.sorted_input = std::is_sorted(raws.begin(), raws.end(),
                                    [](const RawRequest& a, const RawRequest& b) {
                                      return a.timestamp_ticks < b.timestamp_ticks;
                                    });
  if (!res.sorted_input)
    std::stable_sort(raws.begin(), raws.end(), [](const RawRequest& a, const RawRequest& b) {
      return a.timestamp_ticks < b.timestamp_ticks;
    });

  const std::uint64_t epoch = raws.empty() ? 0 : raws.front().timestamp_ticks;
  for (const auto& raw : raws) {
    ++res.requests;
    for (auto& access : expand_to_pages(raw.to_request(epoch), opt.page_size)) {
      if (opt.max_accesses != 0 && res.accesses.size() >= opt.max_accesses) return res;
      res.accesses.push_back(access);
    }
  }
  return res;
}

void TraceSpec::validate() const {
  if (page_universe == 0) throw ConfigError("page_universe must be positive");
  if (!(write_fraction >= 0.0 && write_fraction <= 1.0))
    throw ConfigError("write_fraction must lie in [0,1]");
  if (pattern == Pattern::kZipf && !(zipf_theta > 0.0))
    throw ConfigError("zipf theta must be positive");
  if (!(interarrival_s >= 0.0)) throw ConfigError("interarrival must be non-negative");
}

namespace {

// 53-bit uniform in [0,1) straight from the engine's output so streams do
// not depend on the standard library's distribution implementations.
double u01(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

struct TickStream {
  std::uint64_t ticks = 0;
  double next(std::mt19937_64& rng, const TraceSpec& spec) {
    const double t = double(ticks) / kTicksPerSecond;
    double gap_s = spec.interarrival_s;
    if (spec.exponential_interarrival) gap_s = -std::log1p(-u01(rng)) * spec.interarrival_s;
    ticks += static_cast<std::uint64_t>(std::llround(gap_s * kTicksPerSecond));
    return t;
  }
};

std::vector<double> zipf_cdf(std::uint64_t universe, double theta) {
  std::vector<double> cdf(universe);
  double total = 0.0;
  for (std::uint64_t r = 1; r <= universe; ++r) {
    total += 1.0 / std::pow(double(r), theta);
    cdf[r - 1] = total;
  }
  for (auto& v : cdf) v /= total;
  cdf.back() = 1.0;
  return cdf;
}

}  // namespace

std::vector<PageAccess> generate_synthetic(const TraceSpec& spec) {
  spec.validate();
  std::vector<PageAccess> out;
  out.reserve(spec.access_count);
  std::mt19937_64 rng(spec.seed);
  TickStream clock;
  std::vector<double> cdf;
  if (spec.pattern == Pattern::kZipf) cdf = zipf_cdf(spec.page_universe, spec.zipf_theta);

  for (std::uint64_t i = 0; i < spec.access_count; ++i) {
    std::uint64_t index = 0;
    switch (spec.pattern) {
      case Pattern::kSequential:
        index = i % spec.page_universe;
        break;
      case Pattern::kUniform:
        index = std::min<std::uint64_t>(std::uint64_t(u01(rng) * double(spec.page_universe)),
                                        spec.page_universe - 1);
        break;
      case Pattern::kZipf: {
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), u01(rng));
        index = std::uint64_t(it - cdf.begin());
        break;
      }
    }
    const AccessKind kind =
        u01(rng) < spec.write_fraction ? AccessKind::kWrite : AccessKind::kRead;
    out.push_back({clock.next(rng, spec), PageId(0, index), kind});
  }
  return out;
}

void write_synthetic_csv(const TraceSpec& spec, std::uint64_t page_size,
                         const std::string& path) {
  if (page_size == 0 || (page_size & (page_size - 1)) != 0)
    throw ConfigError("page_size must be a power of two");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& a : generate_synthetic(spec)) {
    const auto ticks = static_cast<std::uint64_t>(std::llround(a.timestamp_s * kTicksPerSecond));
    char buf[160];
    std::snprintf(buf, sizeof buf, "%" PRIu64 ",synth,%u,%s,%" PRIu64 ",%" PRIu64 ",0\n", ticks,
                  a.page.disk(), a.kind == AccessKind::kWrite ? "Write" : "Read",
                  a.page.index() * page_size, page_size);
    out << buf;
  }
}

std::string pattern_name(Pattern p) {
  switch (p) {
    case Pattern::kSequential: return "sequential";
    case Pattern::kUniform: return "uniform";
    case Pattern::kZipf: return "zipf";
  }
  return "uniform";
}

Pattern pattern_from_name(const std::string& name) {
  if (name == "sequential") return Pattern::kSequential;
  if (name == "uniform") return Pattern::kUniform;
  if (name == "zipf") return Pattern::kZipf;
  throw ConfigError("unknown pattern '" + name + "' (sequential|uniform|zipf)");
}

}  // namespace nvbsim
