#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "nvbsim/types.hpp"

namespace nvbsim {

struct IdleInterval {
  double start_s = 0.0;
  double end_s = 0.0;
  double length() const { return end_s - start_s; }
};

// Records, per journal page, the spans between consecutive writes to the
// page's NVM copy. An interval opens when the copy is written (admission,
// rewrite or refresh) and closes at the next write, at eviction, or at end
// of trace. Interval lengths feed the retention-failure model; write counts
// feed the write-failure model.
class IdleLedger {
 public:
  void on_pja_write(PageId page, double t);  // closes any open interval, opens a new one
  void on_refresh(PageId page, double t);    // same, and counts as a refresh
  void on_removal(PageId page, double t);    // closes the open interval, copy is gone
  void finalize(double end_s);               // closes every open interval

  struct PageRecord {
    std::vector<IdleInterval> intervals;
    double open_start = 0.0;
    bool open = false;
    std::uint64_t writes = 0;     // every committed NVM write, refreshes included
    std::uint64_t refreshes = 0;
  };

  const PageRecord* find(PageId page) const;
  bool empty() const { return pages_.empty(); }
  std::size_t page_count() const { return pages_.size(); }

  // Ascending PageId order; every consumer that folds floating point over
  // pages uses this so results do not depend on hash iteration order.
  std::vector<PageId> sorted_pages() const;

  std::uint64_t total_writes() const;
  std::uint64_t total_refreshes() const;

  // Direct population, used by the CSV import path.
  void import_interval(PageId page, double start_s, double end_s);
  void import_writes(PageId page, std::uint64_t writes);

 private:
  PageRecord& record(PageId page) { return pages_[page]; }
  std::unordered_map<PageId, PageRecord> pages_;
};

// CSV round trip for the standalone calculator path. Intervals file columns:
// page_id,interval_start_s,interval_end_s. Writes file columns:
// page_id,write_count. No header rows.
void write_intervals_csv(const IdleLedger& ledger, const std::string& path);
void write_writes_csv(const IdleLedger& ledger, const std::string& path);
void read_intervals_csv(IdleLedger& ledger, const std::string& path);
void read_writes_csv(IdleLedger& ledger, const std::string& path);

}  // namespace nvbsim
