#include "nvbsim/idle_ledger.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nvbsim/errors.hpp"

namespace nvbsim {

void IdleLedger::on_pja_write(PageId page, double t) {
  auto& rec = record(page);
  if (rec.open) rec.intervals.push_back({rec.open_start, t});
  rec.open_start = t;
  rec.open = true;
  ++rec.writes;
}

void IdleLedger::on_refresh(PageId page, double t) {
  on_pja_write(page, t);
  record(page).refreshes += 1;
}

void IdleLedger::on_removal(PageId page, double t) {
  auto& rec = record(page);
  NVB_CHECK(rec.open, "ledger removal without an open interval");
  rec.intervals.push_back({rec.open_start, t});
  rec.open = false;
}

void IdleLedger::finalize(double end_s) {
  for (auto& [page, rec] : pages_) {
    if (!rec.open) continue;
    rec.intervals.push_back({rec.open_start, end_s});
    rec.open = false;
  }
}

const IdleLedger::PageRecord* IdleLedger::find(PageId page) const {
  auto it = pages_.find(page);
  return it == pages_.end() ? nullptr : &it->second;
}

std::vector<PageId> IdleLedger::sorted_pages() const {
  std::vector<PageId> out;
  out.reserve(pages_.size());
  for (const auto& [page, rec] : pages_) out.push_back(page);
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t IdleLedger::total_writes() const {
  std::uint64_t n = 0;
  for (const auto& [page, rec] : pages_) n += rec.writes;
  return n;
}

std::uint64_t IdleLedger::total_refreshes() const {
  std::uint64_t n = 0;
  for (const auto& [page, rec] : pages_) n += rec.refreshes;
  return n;
}

void IdleLedger::import_interval(PageId page, double start_s, double end_s) {
  if (end_s < start_s) throw IoError("ledger interval ends before it starts");
  record(page).intervals.push_back({start_s, end_s});
}

void IdleLedger::import_writes(PageId page, std::uint64_t writes) {
  record(page).writes = writes;
}

namespace {

// %.17g keeps doubles round-trip exact through the CSV path.
void write_rows(std::ofstream& out, const IdleLedger& ledger, bool intervals) {
  for (PageId page : ledger.sorted_pages()) {
    const auto* rec = ledger.find(page);
    if (intervals) {
      for (const auto& iv : rec->intervals) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%" PRIu64 ",%.17g,%.17g\n", page.raw(), iv.start_s,
                      iv.end_s);
        out << buf;
      }
    } else {
      out << page.raw() << ',' << rec->writes << '\n';
    }
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

}  // namespace

void write_intervals_csv(const IdleLedger& ledger, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_rows(out, ledger, /*intervals=*/true);
}

void write_writes_csv(const IdleLedger& ledger, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_rows(out, ledger, /*intervals=*/false);
}

void read_intervals_csv(IdleLedger& ledger, const std::string& path) {
  auto in = open_input(path);
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::uint64_t raw;
    double start, end;
    if (std::sscanf(line.c_str(), "%" SCNu64 ",%lf,%lf", &raw, &start, &end) != 3)
      throw ParseError(line_no, "expected page_id,start_s,end_s");
    ledger.import_interval(PageId::from_raw(raw), start, end);
  }
}

void read_writes_csv(IdleLedger& ledger, const std::string& path) {
  auto in = open_input(path);
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::uint64_t raw, writes;
    if (std::sscanf(line.c_str(), "%" SCNu64 ",%" SCNu64, &raw, &writes) != 2)
      throw ParseError(line_no, "expected page_id,write_count");
    ledger.import_writes(PageId::from_raw(raw), writes);
  }
}

}  // namespace nvbsim
