#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "nvbsim/idle_ledger.hpp"
#include "nvbsim/lru_map.hpp"
#include "nvbsim/types.hpp"

namespace nvbsim {

// Hooks the refresh/flush schemes subscribe to. on_pja_write fires for every
// journal write driven by the request stream (admission or rewrite), never
// for refreshes; a refresh that re-armed the scheme's queues would refresh
// itself forever. on_dirty_eviction fires whenever a page's journal copy is
// dropped (journal eviction, dirty DRAM eviction, explicit flush).
struct BufferEvents {
  std::function<void(PageId)> on_pja_write;
  std::function<void(PageId)> on_dirty_eviction;
  std::function<void(PageId, double)> on_refresh;  // observability only
};

struct AccessOutcome {
  enum class Hit : std::uint8_t { kDramHit, kNvmHit, kMiss };
  Hit hit = Hit::kMiss;
  std::uint32_t dram_reads = 0;
  std::uint32_t dram_writes = 0;
  std::uint32_t pja_reads = 0;
  std::uint32_t pja_writes = 0;
  std::uint32_t storage_reads = 0;
  std::uint32_t storage_writes = 0;
  std::vector<PageId> evicted_flushes;  // pages written to storage by this event

  // Sums counters and appends the flush list; hit kind is left alone.
  void absorb(const AccessOutcome& other) {
    dram_reads += other.dram_reads;
    dram_writes += other.dram_writes;
    pja_reads += other.pja_reads;
    pja_writes += other.pja_writes;
    storage_reads += other.storage_reads;
    storage_writes += other.storage_writes;
    evicted_flushes.insert(evicted_flushes.end(), other.evicted_flushes.begin(),
                           other.evicted_flushes.end());
  }
};

// DRAM buffer backed by a persistent journal area that mirrors exactly the
// dirty pages. Invariant at every event boundary: dirty(p) <=> p in PJA,
// and every PJA page is DRAM resident.
class NvbBuffer {
 public:
  NvbBuffer(std::size_t c_dram, std::size_t c_pja, IdleLedger* ledger);

  void set_events(BufferEvents events) { events_ = std::move(events); }

  // Applies one page access. Write misses allocate. Evictions triggered by
  // a write are handled journal-side first, then DRAM-side.
  AccessOutcome access(const PageAccess& a);

  // Writes a dirty page to storage, cleans it in place and drops its journal
  // copy. Internal error if the page is not dirty-resident.
  AccessOutcome flush_page(PageId page, double now);

  // Rewrites a journal page in place from DRAM: one DRAM read, one journal
  // write, no LRU movement, no storage traffic. A refresh of a page that is
  // not journal resident is skipped and counted.
  AccessOutcome refresh_page(PageId page, double now);

  // Dirty pages with the time they were last dirtied, ascending PageId order.
  std::vector<std::pair<PageId, double>> snapshot_dirty_set() const;

  double clock() const { return clock_; }
  std::size_t dram_size() const { return dram_.size(); }
  std::size_t pja_size() const { return pja_.size(); }
  bool in_dram(PageId page) const { return dram_.contains(page); }
  bool in_pja(PageId page) const { return pja_.contains(page); }
  bool is_dirty(PageId page) const;
  std::vector<PageId> dram_pages_lru() const { return dram_.pages(); }
  std::vector<PageId> pja_pages_lru() const { return pja_.pages(); }

  std::uint64_t flushes_pja_eviction() const { return flushes_pja_eviction_; }
  std::uint64_t flushes_dram_eviction() const { return flushes_dram_eviction_; }
  std::uint64_t flushes_explicit() const { return flushes_explicit_; }
  std::uint64_t skipped_refreshes() const { return skipped_refreshes_; }

  // Structural self-check for tests: dirty <=> journal resident, journal
  // subset of DRAM, capacities respected.
  void validate() const;

 private:
  struct DramMeta {
    bool dirty = false;
    double last_write_s = 0.0;
  };
  struct PjaEntry {
    double last_pja_write_s = 0.0;
    std::uint64_t pja_write_count = 0;  // writes during this residency
  };

  void advance_clock(double t);
  void commit_pja_write(PageId page, double now);
  void evict_pja_victim(AccessOutcome& out, double now);
  void admit_dram(PageId page, DramMeta meta, AccessOutcome& out, double now);
  void drop_pja_entry(PageId page, double now);

  std::size_t c_dram_;
  std::size_t c_pja_;
  IdleLedger* ledger_;
  BufferEvents events_;
  LruMap<DramMeta> dram_;
  LruMap<PjaEntry> pja_;
  double clock_ = 0.0;
  std::uint64_t flushes_pja_eviction_ = 0;
  std::uint64_t flushes_dram_eviction_ = 0;
  std::uint64_t flushes_explicit_ = 0;
  std::uint64_t skipped_refreshes_ = 0;

 public:
  // Test access to journal residency details.
  const PjaEntry* pja_entry(PageId page) const { return pja_.find(page); }
};

// One-tier DRAM+NVM comparison buffer. Writes land in both memories, DRAM
// evictees are admitted to NVM, an NVM hit migrates the page back to DRAM
// (a dirty page keeps its NVM copy), and storage writes happen only when
// NVM evicts a dirty page. NVM may hold clean pages, so there is no
// dirty <=> NVM-resident invariant here; instead dirty(p) implies p in NVM.
class HybBuffer {
 public:
  HybBuffer(std::size_t c_dram, std::size_t c_nvm, IdleLedger* ledger);

  AccessOutcome access(const PageAccess& a);

  // Cleans a dirty page in both tiers after writing it to storage. The NVM
  // copy stays resident (clean). Internal error if the page is not dirty.
  AccessOutcome flush_page(PageId page, double now);

  std::vector<std::pair<PageId, double>> snapshot_dirty_set() const;

  double clock() const { return clock_; }
  std::size_t dram_size() const { return dram_.size(); }
  std::size_t nvm_size() const { return nvm_.size(); }
  bool in_dram(PageId page) const { return dram_.contains(page); }
  bool in_nvm(PageId page) const { return nvm_.contains(page); }
  bool is_dirty(PageId page) const;
  std::vector<PageId> dram_pages_lru() const { return dram_.pages(); }
  std::vector<PageId> nvm_pages_lru() const { return nvm_.pages(); }

  void validate() const;

 private:
  struct DramMeta {
    bool dirty = false;
    double last_write_s = 0.0;
  };
  struct NvmMeta {
    bool dirty = false;
    double last_write_s = 0.0;
  };

  void advance_clock(double t);
  void admit_dram(PageId page, DramMeta meta, AccessOutcome& out, double now);
  void demote_to_nvm(PageId page, const DramMeta& meta, AccessOutcome& out, double now);
  void evict_nvm_victim(AccessOutcome& out, double now);

  std::size_t c_dram_;
  std::size_t c_nvm_;
  IdleLedger* ledger_;
  LruMap<DramMeta> dram_;
  LruMap<NvmMeta> nvm_;
  double clock_ = 0.0;
};

}  // namespace nvbsim
