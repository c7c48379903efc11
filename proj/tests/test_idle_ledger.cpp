#include "nvbsim/idle_ledger.hpp"

#include <cstdio>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "nvbsim/errors.hpp"

using namespace nvbsim;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("writes open intervals, removals and finalize close them") {
  IdleLedger lg;
  const PageId a(0, 1);
  lg.on_pja_write(a, 1.0);
  lg.on_pja_write(a, 4.0);       // rewrite closes [1,4], opens at 4
  lg.on_removal(a, 9.0);         // eviction closes [4,9]
  lg.on_pja_write(a, 10.0);      // re-admission
  lg.finalize(12.0);

  const auto* rec = lg.find(a);
  REQUIRE(rec != nullptr);
  REQUIRE(rec->intervals.size() == 3);
  CHECK(rec->intervals[0].start_s == 1.0);
  CHECK(rec->intervals[0].end_s == 4.0);
  CHECK(rec->intervals[1].start_s == 4.0);
  CHECK(rec->intervals[1].end_s == 9.0);
  CHECK(rec->intervals[2].start_s == 10.0);
  CHECK(rec->intervals[2].end_s == 12.0);
  CHECK(rec->writes == 3);
  CHECK(rec->refreshes == 0);
  CHECK_FALSE(rec->open);
}

TEST_CASE("intervals are disjoint, ordered and non-negative under churn") {
  IdleLedger lg;
  const PageId a(1, 7);
  double t = 0.0;
  for (int i = 0; i < 50; ++i) {
    lg.on_pja_write(a, t);
    t += (i % 3) * 0.5;  // includes zero-length gaps
    if (i % 5 == 4) {
      lg.on_removal(a, t);
      t += 1.0;
    }
  }
  lg.finalize(t);
  const auto* rec = lg.find(a);
  double prev_end = -1.0;
  for (const auto& iv : rec->intervals) {
    CHECK(iv.end_s >= iv.start_s);
    CHECK(iv.start_s >= prev_end);
    prev_end = iv.end_s;
  }
}

TEST_CASE("refresh counts separately but commits a write") {
  IdleLedger lg;
  const PageId a(0, 2);
  lg.on_pja_write(a, 0.0);
  lg.on_refresh(a, 100.0);
  lg.on_refresh(a, 100.0);  // back-to-back: second interval has zero length
  lg.finalize(150.0);
  const auto* rec = lg.find(a);
  REQUIRE(rec->intervals.size() == 3);
  CHECK(rec->intervals[0].length() == 100.0);
  CHECK(rec->intervals[1].length() == 0.0);
  CHECK(rec->writes == 3);
  CHECK(rec->refreshes == 2);
  CHECK(lg.total_refreshes() == 2);
  CHECK(lg.total_writes() == 3);
}

TEST_CASE("removal without an open interval is an internal error") {
  IdleLedger lg;
  CHECK_THROWS_AS(lg.on_removal(PageId(0, 3), 1.0), InternalError);
}

TEST_CASE("csv round trip preserves intervals and write counts") {
  IdleLedger lg;
  lg.on_pja_write(PageId(0, 5), 0.125);
  lg.on_pja_write(PageId(0, 5), 7.25);
  lg.on_pja_write(PageId(3, 9), 1e-7);
  lg.finalize(100.5);

  const auto ipath = temp_path("nvbsim_test_intervals.csv");
  const auto wpath = temp_path("nvbsim_test_writes.csv");
  write_intervals_csv(lg, ipath);
  write_writes_csv(lg, wpath);

  IdleLedger back;
  read_intervals_csv(back, ipath);
  read_writes_csv(back, wpath);
  for (PageId page : lg.sorted_pages()) {
    const auto* a = lg.find(page);
    const auto* b = back.find(page);
    REQUIRE(b != nullptr);
    REQUIRE(a->intervals.size() == b->intervals.size());
    for (std::size_t i = 0; i < a->intervals.size(); ++i) {
      CHECK(a->intervals[i].start_s == b->intervals[i].start_s);
      CHECK(a->intervals[i].end_s == b->intervals[i].end_s);
    }
    CHECK(a->writes == b->writes);
  }
  std::remove(ipath.c_str());
  std::remove(wpath.c_str());
}

TEST_CASE("csv import rejects malformed rows with line numbers") {
  const auto path = temp_path("nvbsim_test_bad.csv");
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("1,0.0,2.0\nnot-a-row\n", f);
    std::fclose(f);
  }
  IdleLedger lg;
  try {
    read_intervals_csv(lg, path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_intervals_csv(lg, "/nonexistent/nvbsim.csv"), IoError);
}
