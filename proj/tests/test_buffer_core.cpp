#include "nvbsim/buffer_core.hpp"

#include <vector>

#include "doctest.h"
#include "lru_oracle.hpp"
#include "nvbsim/errors.hpp"
#include "nvbsim/trace_io.hpp"

using namespace nvbsim;

namespace {

const PageId A(0, 1), B(0, 2), C(0, 3), D(0, 4), E(0, 5), F(0, 6);

PageAccess rd(PageId p, double t) { return {t, p, AccessKind::kRead}; }
PageAccess wr(PageId p, double t) { return {t, p, AccessKind::kWrite}; }

}  // namespace

TEST_CASE("micro-trace: journal eviction cleans, dirty DRAM eviction flushes") {
  // Eight accesses against a 4-page DRAM / 2-page journal: W A, W B, R A,
  // W C, R D, R A, R E, R F. The journal fills at B, the read of A bumps A
  // in both LRU queues, so admitting C evicts B's journal copy; the read of
  // F later evicts dirty C from DRAM. A survives dirty to the end.
  IdleLedger lg;
  NvbBuffer buf(4, 2, &lg);

  auto out = buf.access(wr(A, 1));
  CHECK(out.hit == AccessOutcome::Hit::kMiss);
  CHECK(out.pja_writes == 1);
  buf.validate();

  out = buf.access(wr(B, 2));
  CHECK(out.storage_writes == 0);
  buf.validate();

  out = buf.access(rd(A, 3));
  CHECK(out.hit == AccessOutcome::Hit::kDramHit);
  CHECK(out.pja_writes == 0);  // recency only, no journal write
  buf.validate();

  out = buf.access(wr(C, 4));
  CHECK(out.storage_writes == 1);
  REQUIRE(out.evicted_flushes.size() == 1);
  CHECK(out.evicted_flushes[0] == B);
  CHECK(buf.in_dram(B));       // flushed in place, stays cached
  CHECK_FALSE(buf.is_dirty(B));
  CHECK_FALSE(buf.in_pja(B));
  CHECK(buf.in_pja(A));
  buf.validate();

  out = buf.access(rd(D, 5));
  CHECK(out.hit == AccessOutcome::Hit::kMiss);
  CHECK(out.storage_reads == 1);
  CHECK(out.dram_writes == 1);
  buf.validate();

  out = buf.access(rd(A, 6));
  CHECK(out.hit == AccessOutcome::Hit::kDramHit);
  buf.validate();

  out = buf.access(rd(E, 7));
  CHECK(out.storage_writes == 0);  // B is clean now, silent eviction
  CHECK_FALSE(buf.in_dram(B));
  buf.validate();

  out = buf.access(rd(F, 8));
  CHECK(out.storage_writes == 1);
  REQUIRE(out.evicted_flushes.size() == 1);
  CHECK(out.evicted_flushes[0] == C);  // dirty DRAM eviction drops the journal copy
  CHECK_FALSE(buf.in_pja(C));
  buf.validate();

  const auto dirty = buf.snapshot_dirty_set();
  REQUIRE(dirty.size() == 1);
  CHECK(dirty[0].first == A);
  CHECK(dirty[0].second == 1.0);  // dirtied once, at access 1

  CHECK(buf.flushes_pja_eviction() == 1);
  CHECK(buf.flushes_dram_eviction() == 1);

  lg.finalize(8.0);
  const auto* rec = lg.find(A);
  REQUIRE(rec->intervals.size() == 1);
  CHECK(rec->intervals[0].start_s == 1.0);
  CHECK(rec->intervals[0].end_s == 8.0);
  CHECK(lg.find(B)->intervals.size() == 1);
  CHECK(lg.find(B)->intervals[0].end_s == 4.0);
  CHECK(lg.find(C)->intervals[0].start_s == 4.0);
  CHECK(lg.find(C)->intervals[0].end_s == 8.0);
}

TEST_CASE("cold read misses storage and admits clean") {
  IdleLedger lg;
  NvbBuffer buf(2, 1, &lg);
  const auto out = buf.access(rd(A, 0));
  CHECK(out.hit == AccessOutcome::Hit::kMiss);
  CHECK(out.storage_reads == 1);
  CHECK(out.dram_writes == 1);
  CHECK(out.pja_writes == 0);
  CHECK(buf.in_dram(A));
  CHECK_FALSE(buf.is_dirty(A));
  CHECK(buf.pja_size() == 0);
}

TEST_CASE("rewrites accumulate journal write counts and split intervals") {
  IdleLedger lg;
  NvbBuffer buf(4, 2, &lg);
  buf.access(wr(A, 0));
  buf.access(wr(A, 30));
  CHECK(buf.pja_entry(A)->pja_write_count == 2);
  lg.finalize(45);
  const auto* rec = lg.find(A);
  REQUIRE(rec->intervals.size() == 2);
  CHECK(rec->intervals[0].length() == 30.0);
  CHECK(rec->intervals[1].length() == 15.0);
  CHECK(rec->writes == 2);
}

TEST_CASE("flush cleans in place; a later write starts a fresh residency") {
  IdleLedger lg;
  NvbBuffer buf(4, 2, &lg);
  buf.access(wr(A, 0));
  buf.access(wr(A, 5));
  const auto out = buf.flush_page(A, 12);
  CHECK(out.storage_writes == 1);
  CHECK_FALSE(buf.is_dirty(A));
  CHECK_FALSE(buf.in_pja(A));
  CHECK(buf.in_dram(A));
  CHECK(buf.flushes_explicit() == 1);
  buf.validate();

  buf.access(wr(A, 20));
  CHECK(buf.pja_entry(A)->pja_write_count == 1);  // residency counter restarts
  const auto* rec = lg.find(A);
  CHECK(rec->writes == 3);  // the ledger keeps the cumulative count

  // Flushing a clean or absent page is a simulator bug.
  CHECK_THROWS_AS((void)buf.flush_page(B, 21), InternalError);
  buf.flush_page(A, 22);
  CHECK_THROWS_AS((void)buf.flush_page(A, 23), InternalError);
}

TEST_CASE("refresh rewrites in place without touching recency or storage") {
  IdleLedger lg;
  NvbBuffer buf(4, 3, &lg);
  buf.access(wr(A, 0));
  buf.access(wr(B, 1));

  const auto out = buf.refresh_page(A, 100);
  CHECK(out.dram_reads == 1);
  CHECK(out.pja_writes == 1);
  CHECK(out.storage_writes == 0);
  CHECK(buf.pja_entry(A)->pja_write_count == 2);
  // A was refreshed after B's write but stays the journal LRU victim.
  CHECK(buf.pja_pages_lru().front() == A);
  CHECK(buf.dram_pages_lru().front() == A);

  const auto* rec = lg.find(A);
  REQUIRE(rec->intervals.size() == 1);
  CHECK(rec->intervals[0].length() == 100.0);
  CHECK(rec->refreshes == 1);

  // Back-to-back refreshes leave a zero-length interval behind.
  buf.refresh_page(A, 100);
  CHECK(lg.find(A)->intervals[1].length() == 0.0);

  // Refreshing a page with no journal copy is ignored but counted.
  const auto skipped = buf.refresh_page(F, 101);
  CHECK(skipped.pja_writes == 0);
  CHECK(buf.skipped_refreshes() == 1);
}

TEST_CASE("hit/miss decisions equal a plain LRU of the DRAM capacity") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    TraceSpec spec;
    spec.access_count = 1000;
    spec.page_universe = 300;
    spec.pattern = Pattern::kUniform;
    spec.write_fraction = 0.4;
    spec.seed = seed;
    IdleLedger lg;
    NvbBuffer buf(128, 32, &lg);
    testing::LruOracle oracle(128);
    for (const auto& a : generate_synthetic(spec)) {
      const bool oracle_hit = oracle.access(a.page);
      const auto out = buf.access(a);
      CHECK((out.hit == AccessOutcome::Hit::kDramHit) == oracle_hit);
    }
  }
}

TEST_CASE("invariants hold after every access under heavy churn") {
  TraceSpec spec;
  spec.access_count = 3000;
  spec.page_universe = 64;
  spec.pattern = Pattern::kZipf;
  spec.zipf_theta = 1.1;
  spec.write_fraction = 0.6;
  spec.seed = 13;
  IdleLedger lg;
  NvbBuffer buf(24, 8, &lg);
  std::uint64_t storage_writes = 0;
  for (const auto& a : generate_synthetic(spec)) {
    storage_writes += buf.access(a).storage_writes;
    buf.validate();
  }
  CHECK(storage_writes ==
        buf.flushes_pja_eviction() + buf.flushes_dram_eviction() + buf.flushes_explicit());
  CHECK(buf.dram_size() <= 24);
  CHECK(buf.pja_size() <= 8);
}

TEST_CASE("capacity one in both tiers still upholds the invariant") {
  IdleLedger lg;
  NvbBuffer buf(1, 1, &lg);
  buf.access(wr(A, 0));
  buf.validate();
  auto out = buf.access(wr(B, 1));  // evicts A from journal then DRAM
  buf.validate();
  CHECK(out.storage_writes == 1);
  CHECK(buf.in_dram(B));
  CHECK(buf.is_dirty(B));
  out = buf.access(rd(C, 2));  // dirty B flushed on DRAM eviction
  buf.validate();
  CHECK(out.storage_writes == 1);
  CHECK(buf.pja_size() == 0);
}

TEST_CASE("rejects zero capacities") {
  IdleLedger lg;
  CHECK_THROWS_AS(NvbBuffer(0, 1, &lg), ConfigError);
  CHECK_THROWS_AS(NvbBuffer(1, 0, &lg), ConfigError);
  CHECK_THROWS_AS(HybBuffer(0, 1, &lg), ConfigError);
}

TEST_CASE("hyb: writes land in both tiers") {
  IdleLedger lg;
  HybBuffer buf(3, 2, &lg);
  const auto out = buf.access(wr(A, 0));
  CHECK(out.dram_writes == 1);
  CHECK(out.pja_writes == 1);
  CHECK(buf.in_dram(A));
  CHECK(buf.in_nvm(A));
  CHECK(buf.is_dirty(A));
  buf.validate();
}

TEST_CASE("hyb: clean page evicted from DRAM is served from NVM without storage") {
  IdleLedger lg;
  HybBuffer buf(2, 2, &lg);
  buf.access(rd(A, 0));
  buf.access(rd(B, 1));
  auto out = buf.access(rd(C, 2));  // evicts clean A into NVM
  CHECK(out.storage_reads == 1);
  CHECK(buf.in_nvm(A));
  CHECK_FALSE(buf.in_dram(A));
  buf.validate();

  out = buf.access(rd(A, 3));
  CHECK(out.hit == AccessOutcome::Hit::kNvmHit);
  CHECK(out.storage_reads == 0);
  CHECK(out.pja_reads == 1);
  CHECK(buf.in_dram(A));
  CHECK_FALSE(buf.in_nvm(A));  // clean migration vacates the NVM slot
  buf.validate();
}

TEST_CASE("hyb: one more write over a full hierarchy costs one storage write") {
  // Hand-simulated 3-page DRAM / 2-page NVM fill: W A, W B, R C fills both
  // tiers with dirty set {A,B}; W D must flush exactly the NVM LRU victim.
  IdleLedger lg;
  HybBuffer buf(3, 2, &lg);
  CHECK(buf.access(wr(A, 0)).storage_writes == 0);
  CHECK(buf.access(wr(B, 1)).storage_writes == 0);
  CHECK(buf.access(rd(C, 2)).storage_writes == 0);
  CHECK(buf.dram_size() == 3);
  CHECK(buf.nvm_size() == 2);
  buf.validate();

  const auto out = buf.access(wr(D, 3));
  CHECK(out.storage_writes == 1);
  REQUIRE(out.evicted_flushes.size() == 1);
  CHECK(out.evicted_flushes[0] == B);  // NVM LRU at eviction time
  CHECK_FALSE(buf.is_dirty(B));
  CHECK(buf.in_dram(B));
  // A was evicted from DRAM dirty; its persistent copy lives on in NVM.
  CHECK_FALSE(buf.in_dram(A));
  CHECK(buf.in_nvm(A));
  CHECK(buf.is_dirty(A));
  buf.validate();
}

TEST_CASE("hyb: dirty NVM-only page migrates back keeping its copy") {
  IdleLedger lg;
  HybBuffer buf(1, 2, &lg);
  buf.access(wr(A, 0));
  buf.access(rd(B, 1));  // evicts dirty A from DRAM; A persists in NVM
  CHECK_FALSE(buf.in_dram(A));
  CHECK(buf.is_dirty(A));
  const auto out = buf.access(rd(A, 2));
  CHECK(out.hit == AccessOutcome::Hit::kNvmHit);
  CHECK(buf.in_dram(A));
  CHECK(buf.in_nvm(A));  // dirty page keeps the NVM copy after migration
  CHECK(buf.is_dirty(A));
  buf.validate();
}

TEST_CASE("hyb: flush cleans both copies and keeps them resident") {
  IdleLedger lg;
  HybBuffer buf(3, 2, &lg);
  buf.access(wr(A, 0));
  const auto out = buf.flush_page(A, 5);
  CHECK(out.storage_writes == 1);
  CHECK_FALSE(buf.is_dirty(A));
  CHECK(buf.in_dram(A));
  CHECK(buf.in_nvm(A));
  CHECK_THROWS_AS((void)buf.flush_page(A, 6), InternalError);
  buf.validate();
}

TEST_CASE("hyb: invariants hold under churn") {
  TraceSpec spec;
  spec.access_count = 3000;
  spec.page_universe = 48;
  spec.pattern = Pattern::kUniform;
  spec.write_fraction = 0.5;
  spec.seed = 77;
  IdleLedger lg;
  HybBuffer buf(12, 6, &lg);
  for (const auto& a : generate_synthetic(spec)) {
    buf.access(a);
    buf.validate();
  }
}
