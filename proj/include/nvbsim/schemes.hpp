#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "nvbsim/buffer_core.hpp"
#include "nvbsim/types.hpp"

namespace nvbsim {

enum class SchemeKind : std::uint8_t {
  kNoPdflush,   // journal pages persist untouched until evicted
  kBaseline,    // periodic flush of pages past an idle threshold
  kConvScheme,  // periodic refresh of every journal page
  kCopa,        // distant refreshing via sleepy/awake queues
};

const char* scheme_name(SchemeKind kind);
SchemeKind scheme_from_name(std::string_view name);  // ConfigError on unknown

struct SchemeConfig {
  SchemeKind kind = SchemeKind::kNoPdflush;
  double timestep_s = 30.0;  // half of the steady refresh period
  double pdflush_interval_s = 5.0;
  double pdflush_idle_threshold_s = 30.0;
  double conv_period_s = 60.0;
  // When true, refreshed entries re-enter the queue that is about to become
  // sleepy, so resident pages keep refreshing every two time-steps. When
  // false, a refreshed page is not tracked again until its next write.
  bool copa_requeue = true;

  void validate() const;      // ConfigError unless all periods are > 0
  double timer_period() const;  // 0 when the scheme runs no timer
};

// Timer instants k*period for k = 1.. while k*period <= trace_end_s.
std::vector<double> schedule_timers(const SchemeConfig& config, double trace_end_s);

struct TimerReport {
  double at_s = 0.0;
  std::uint64_t pages_refreshed = 0;
  std::uint64_t pages_flushed = 0;
  // Queue slots examined, including invalidated ones. Exposes that a timer's
  // work scales with the drained queue only, never with the other queue.
  std::uint64_t entries_scanned = 0;
  // Summed buffer work of every refresh/flush this timer performed, so the
  // metrics layer can account traffic and (optionally) latency.
  AccessOutcome work;
};

// Two-bit counter steering the queue roles. The high bit (QI) names which
// queue is sleepy; the low bit (DC) routes incoming writes: 0 = sleepy,
// 1 = awake. Advances once per time-step, modulo 4.
class StateCounter {
 public:
  unsigned value() const { return value_; }
  bool qi() const { return (value_ >> 1) & 1u; }
  bool dc() const { return value_ & 1u; }
  void advance() { value_ = (value_ + 1u) & 3u; }

 private:
  unsigned value_ = 0;
};

// A pair of append-only queues with tombstone invalidation. Each page has at
// most one valid entry across both queues; invalidated slots stay in place
// and are skipped when drained.
class CopaQueues {
 public:
  // Invalidates any existing entry for the page, then appends to queue qid.
  void insert(int qid, PageId page);
  // Returns true if a valid entry existed.
  bool invalidate(PageId page);
  bool has_valid_entry(PageId page) const { return index_.contains(page); }
  std::size_t valid_count() const { return index_.size(); }
  std::size_t slot_count(int qid) const { return q_[check_qid(qid)].size(); }
  std::vector<PageId> valid_pages(int qid) const;

  // Empties queue qid, calling fn for each valid page in insertion order.
  // Drained pages leave the index before fn runs, so fn may re-insert them.
  // Returns the number of slots scanned.
  std::uint64_t drain(int qid, const std::function<void(PageId)>& fn);

  void check_consistent() const;  // InternalError when index and slots disagree

 private:
  struct Slot {
    PageId page;
    bool valid;
  };
  static int check_qid(int qid);

  std::vector<Slot> q_[2];
  std::unordered_map<PageId, std::pair<int, std::size_t>> index_;
};

// Scheme interface the replay loop drives: buffer events feed note_*, and
// every scheduled timer instant calls on_timer.
class Scheme {
 public:
  virtual ~Scheme() = default;
  virtual void note_pja_write(PageId) {}
  virtual void note_dirty_eviction(PageId) {}
  virtual TimerReport on_timer(NvbBuffer& buf, double now) = 0;
};

// Flushes dirty pages whose last write is at least idle_threshold_s old.
// With interval I and threshold H, no page can stay dirty-idle past H + I.
class BaselineScheme : public Scheme {
 public:
  explicit BaselineScheme(double idle_threshold_s) : idle_threshold_s_(idle_threshold_s) {}
  TimerReport on_timer(NvbBuffer& buf, double now) override;

 private:
  double idle_threshold_s_;
};

// Refreshes every journal-resident page each period, regardless of recency.
class ConvScheme : public Scheme {
 public:
  TimerReport on_timer(NvbBuffer& buf, double now) override;
};

// Distant refreshing. Writes enqueue page metadata by the counter's DC bit;
// every second timer drains the sleepy queue and refreshes its valid pages,
// so a page written once is refreshed after an idle interval in (T, 3T) and
// recently written pages are skipped. Relabeling sleepy/awake is a counter
// increment, not a copy.
class CopaScheme : public Scheme {
 public:
  explicit CopaScheme(bool requeue) : requeue_(requeue) {}

  void note_pja_write(PageId page) override;
  void note_dirty_eviction(PageId page) override;
  TimerReport on_timer(NvbBuffer& buf, double now) override;

  const StateCounter& counter() const { return counter_; }
  int sleepy_qid() const { return counter_.qi() ? 1 : 0; }
  int awake_qid() const { return 1 - sleepy_qid(); }
  const CopaQueues& queues() const { return queues_; }

  // Requeue-mode invariant: every journal page has exactly one valid entry.
  void check_consistent(const NvbBuffer& buf) const;

 private:
  StateCounter counter_;
  CopaQueues queues_;
  bool requeue_;
};

// nullptr for kNoPdflush: it has no timers and ignores buffer events.
std::unique_ptr<Scheme> make_scheme(const SchemeConfig& config);

}  // namespace nvbsim
