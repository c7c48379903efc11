#include "nvbsim/buffer_core.hpp"

#include <algorithm>

#include "nvbsim/errors.hpp"

namespace nvbsim {

NvbBuffer::NvbBuffer(std::size_t c_dram, std::size_t c_pja, IdleLedger* ledger)
    : c_dram_(c_dram), c_pja_(c_pja), ledger_(ledger) {
  if (c_dram_ == 0 || c_pja_ == 0) throw ConfigError("buffer capacities must be at least 1");
  NVB_CHECK(ledger_ != nullptr, "buffer requires a ledger");
}

void NvbBuffer::advance_clock(double t) {
  NVB_CHECK(t >= clock_, "simulated time moved backwards");
  clock_ = t;
}

bool NvbBuffer::is_dirty(PageId page) const {
  const auto* meta = dram_.find(page);
  return meta != nullptr && meta->dirty;
}

void NvbBuffer::drop_pja_entry(PageId page, double now) {
  pja_.erase(page);
  ledger_->on_removal(page, now);
  if (events_.on_dirty_eviction) events_.on_dirty_eviction(page);
}

void NvbBuffer::evict_pja_victim(AccessOutcome& out, double now) {
  const PageId victim = pja_.lru_page();
  auto* meta = dram_.find(victim);
  NVB_CHECK(meta != nullptr && meta->dirty, "journal victim must be a dirty DRAM page");
  meta->dirty = false;
  out.storage_writes += 1;
  out.evicted_flushes.push_back(victim);
  ++flushes_pja_eviction_;
  drop_pja_entry(victim, now);
}

void NvbBuffer::admit_dram(PageId page, DramMeta meta, AccessOutcome& out, double now) {
  if (dram_.size() == c_dram_) {
    auto [victim, vmeta] = dram_.evict_lru();
    if (vmeta.dirty) {
      NVB_CHECK(pja_.contains(victim), "dirty page missing its journal copy");
      out.storage_writes += 1;
      out.evicted_flushes.push_back(victim);
      ++flushes_dram_eviction_;
      drop_pja_entry(victim, now);
    }
  }
  dram_.insert_mru(page, meta);
}

AccessOutcome NvbBuffer::access(const PageAccess& a) {
  advance_clock(a.timestamp_s);
  const double now = a.timestamp_s;
  AccessOutcome out;

  if (a.kind == AccessKind::kRead) {
    if (dram_.touch(a.page) != nullptr) {
      out.hit = AccessOutcome::Hit::kDramHit;
      out.dram_reads = 1;
      // A read hit refreshes recency in both queues but writes nothing, so
      // the journal copy's idle interval keeps running.
      pja_.touch(a.page);
      return out;
    }
    out.hit = AccessOutcome::Hit::kMiss;
    out.storage_reads = 1;
    admit_dram(a.page, DramMeta{false, 0.0}, out, now);
    out.dram_writes = 1;
    return out;
  }

  // Write. Journal phase first, then DRAM: with both sides full, the journal
  // victim is flushed before the DRAM victim is chosen.
  if (auto* entry = pja_.touch(a.page)) {
    entry->last_pja_write_s = now;
    entry->pja_write_count += 1;
  } else {
    if (pja_.size() == c_pja_) evict_pja_victim(out, now);
    pja_.insert_mru(a.page, PjaEntry{now, 1});
  }
  ledger_->on_pja_write(a.page, now);
  out.pja_writes = 1;
  if (events_.on_pja_write) events_.on_pja_write(a.page);

  if (auto* meta = dram_.touch(a.page)) {
    out.hit = AccessOutcome::Hit::kDramHit;
    meta->dirty = true;
    meta->last_write_s = now;
  } else {
    out.hit = AccessOutcome::Hit::kMiss;
    admit_dram(a.page, DramMeta{true, now}, out, now);
  }
  out.dram_writes = 1;
  return out;
}

AccessOutcome NvbBuffer::flush_page(PageId page, double now) {
  advance_clock(now);
  auto* meta = dram_.find(page);
  NVB_CHECK(meta != nullptr && meta->dirty && pja_.contains(page),
            "flush requires a dirty journal-resident page");
  meta->dirty = false;
  AccessOutcome out;
  out.storage_writes = 1;
  out.evicted_flushes.push_back(page);
  ++flushes_explicit_;
  drop_pja_entry(page, now);
  return out;
}

AccessOutcome NvbBuffer::refresh_page(PageId page, double now) {
  advance_clock(now);
  AccessOutcome out;
  auto* entry = pja_.find(page);  // no recency change
  if (entry == nullptr) {
    ++skipped_refreshes_;
    return out;
  }
  entry->last_pja_write_s = now;
  entry->pja_write_count += 1;
  out.dram_reads = 1;
  out.pja_writes = 1;
  ledger_->on_refresh(page, now);
  if (events_.on_refresh) events_.on_refresh(page, now);
  return out;
}

std::vector<std::pair<PageId, double>> NvbBuffer::snapshot_dirty_set() const {
  std::vector<std::pair<PageId, double>> out;
  for (PageId page : pja_.pages()) {
    const auto* meta = dram_.find(page);
    NVB_CHECK(meta != nullptr && meta->dirty, "journal page must be dirty DRAM resident");
    out.emplace_back(page, meta->last_write_s);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void NvbBuffer::validate() const {
  NVB_CHECK(dram_.size() <= c_dram_ && pja_.size() <= c_pja_, "capacity exceeded");
  std::size_t dirty = 0;
  for (PageId page : dram_.pages()) {
    const auto* meta = dram_.find(page);
    if (meta->dirty) {
      ++dirty;
      NVB_CHECK(pja_.contains(page), "dirty page missing from journal");
    } else {
      NVB_CHECK(!pja_.contains(page), "clean page present in journal");
    }
  }
  NVB_CHECK(dirty == pja_.size(), "journal holds non-dirty entries");
}

HybBuffer::HybBuffer(std::size_t c_dram, std::size_t c_nvm, IdleLedger* ledger)
    : c_dram_(c_dram), c_nvm_(c_nvm), ledger_(ledger) {
  if (c_dram_ == 0 || c_nvm_ == 0) throw ConfigError("buffer capacities must be at least 1");
  NVB_CHECK(ledger_ != nullptr, "buffer requires a ledger");
}

void HybBuffer::advance_clock(double t) {
  NVB_CHECK(t >= clock_, "simulated time moved backwards");
  clock_ = t;
}

bool HybBuffer::is_dirty(PageId page) const {
  const auto* nv = nvm_.find(page);
  return nv != nullptr && nv->dirty;
}

void HybBuffer::evict_nvm_victim(AccessOutcome& out, double now) {
  auto [victim, meta] = nvm_.evict_lru();
  ledger_->on_removal(victim, now);
  if (meta.dirty) {
    out.storage_writes += 1;
    out.evicted_flushes.push_back(victim);
    if (auto* dm = dram_.find(victim)) dm->dirty = false;
  }
}

void HybBuffer::demote_to_nvm(PageId page, const DramMeta& meta, AccessOutcome& out,
                              double now) {
  if (auto* nv = nvm_.touch(page)) {
    // Re-admission of a page that never left NVM: recency bump only, the
    // NVM copy is already current because writes land in both tiers.
    NVB_CHECK(!meta.dirty || nv->dirty, "dirty DRAM evictee lacks a dirty NVM copy");
    return;
  }
  if (nvm_.size() == c_nvm_) evict_nvm_victim(out, now);
  nvm_.insert_mru(page, NvmMeta{meta.dirty, meta.last_write_s});
  ledger_->on_pja_write(page, now);
  out.pja_writes += 1;
}

void HybBuffer::admit_dram(PageId page, DramMeta meta, AccessOutcome& out, double now) {
  if (dram_.size() == c_dram_) {
    auto [victim, vmeta] = dram_.evict_lru();
    demote_to_nvm(victim, vmeta, out, now);
  }
  dram_.insert_mru(page, meta);
}

AccessOutcome HybBuffer::access(const PageAccess& a) {
  advance_clock(a.timestamp_s);
  const double now = a.timestamp_s;
  AccessOutcome out;

  if (a.kind == AccessKind::kRead) {
    if (dram_.touch(a.page) != nullptr) {
      out.hit = AccessOutcome::Hit::kDramHit;
      out.dram_reads = 1;
      return out;
    }
    if (auto* nv = nvm_.find(a.page)) {
      out.hit = AccessOutcome::Hit::kNvmHit;
      out.pja_reads = 1;
      const NvmMeta copy = *nv;
      if (copy.dirty) {
        nvm_.touch(a.page);  // dirty page keeps its persistent copy
      } else {
        ledger_->on_removal(a.page, now);
        nvm_.erase(a.page);  // clean migration vacates the NVM slot
      }
      admit_dram(a.page, DramMeta{copy.dirty, copy.last_write_s}, out, now);
      out.dram_writes = 1;
      return out;
    }
    out.hit = AccessOutcome::Hit::kMiss;
    out.storage_reads = 1;
    admit_dram(a.page, DramMeta{false, 0.0}, out, now);
    out.dram_writes = 1;
    return out;
  }

  // Write: both tiers take the page. DRAM side first; storage writes only
  // ever originate from NVM evictions of dirty pages.
  if (auto* meta = dram_.touch(a.page)) {
    out.hit = AccessOutcome::Hit::kDramHit;
    meta->dirty = true;
    meta->last_write_s = now;
  } else {
    out.hit = nvm_.contains(a.page) ? AccessOutcome::Hit::kNvmHit : AccessOutcome::Hit::kMiss;
    admit_dram(a.page, DramMeta{true, now}, out, now);
  }
  out.dram_writes = 1;

  if (auto* nv = nvm_.touch(a.page)) {
    nv->dirty = true;
    nv->last_write_s = now;
  } else {
    if (nvm_.size() == c_nvm_) evict_nvm_victim(out, now);
    nvm_.insert_mru(a.page, NvmMeta{true, now});
  }
  ledger_->on_pja_write(a.page, now);
  out.pja_writes += 1;
  return out;
}

AccessOutcome HybBuffer::flush_page(PageId page, double now) {
  advance_clock(now);
  auto* nv = nvm_.find(page);
  NVB_CHECK(nv != nullptr && nv->dirty, "flush requires a dirty page");
  nv->dirty = false;
  if (auto* dm = dram_.find(page)) dm->dirty = false;
  AccessOutcome out;
  out.storage_writes = 1;
  out.evicted_flushes.push_back(page);
  return out;
}

std::vector<std::pair<PageId, double>> HybBuffer::snapshot_dirty_set() const {
  std::vector<std::pair<PageId, double>> out;
  for (PageId page : nvm_.pages()) {
    const auto* nv = nvm_.find(page);
    if (nv->dirty) out.emplace_back(page, nv->last_write_s);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void HybBuffer::validate() const {
  NVB_CHECK(dram_.size() <= c_dram_ && nvm_.size() <= c_nvm_, "capacity exceeded");
  for (PageId page : dram_.pages()) {
    const auto* meta = dram_.find(page);
    if (meta->dirty) {
      const auto* nv = nvm_.find(page);
      NVB_CHECK(nv != nullptr && nv->dirty, "dirty DRAM page lacks a dirty NVM copy");
    }
  }
}

}  // namespace nvbsim
