#include "nvbsim/schemes.hpp"

#include <cmath>
#include <string>

#include "nvbsim/errors.hpp"

namespace nvbsim {

const char* scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::kNoPdflush: return "no_pdflush";
    case SchemeKind::kBaseline: return "baseline";
    case SchemeKind::kConvScheme: return "conv";
    case SchemeKind::kCopa: return "copa";
  }
  throw InternalError("unknown scheme kind");
}

SchemeKind scheme_from_name(std::string_view name) {
  if (name == "no_pdflush") return SchemeKind::kNoPdflush;
  if (name == "baseline") return SchemeKind::kBaseline;
  if (name == "conv") return SchemeKind::kConvScheme;
  if (name == "copa") return SchemeKind::kCopa;
  throw ConfigError("unknown scheme name: " + std::string(name));
}

void SchemeConfig::validate() const {
  const auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError(std::string(what) + " must be a positive finite number");
    }
  };
  positive(timestep_s, "timestep_s");
  positive(pdflush_interval_s, "pdflush_interval_s");
  positive(conv_period_s, "conv_period_s");
  if (pdflush_idle_threshold_s < 0.0 || !std::isfinite(pdflush_idle_threshold_s)) {
    throw ConfigError("pdflush_idle_threshold_s must be finite and >= 0");
  }
}

double SchemeConfig::timer_period() const {
  switch (kind) {
    case SchemeKind::kNoPdflush: return 0.0;
    case SchemeKind::kBaseline: return pdflush_interval_s;
    case SchemeKind::kConvScheme: return conv_period_s;
    case SchemeKind::kCopa: return timestep_s;
  }
  throw InternalError("unknown scheme kind");
}

std::vector<double> schedule_timers(const SchemeConfig& config, double trace_end_s) {
  config.validate();
  std::vector<double> out;
  const double period = config.timer_period();
  if (period <= 0.0) return out;
  // Multiply rather than accumulate so instant k is exactly k*period.
  for (std::uint64_t k = 1; static_cast<double>(k) * period <= trace_end_s; ++k) {
    out.push_back(static_cast<double>(k) * period);
  }
  return out;
}

int CopaQueues::check_qid(int qid) {
  NVB_CHECK(qid == 0 || qid == 1, "queue id out of range");
  return qid;
}

void CopaQueues::insert(int qid, PageId page) {
  check_qid(qid);
  invalidate(page);
  q_[qid].push_back(Slot{page, true});
  index_[page] = {qid, q_[qid].size() - 1};
}

bool CopaQueues::invalidate(PageId page) {
  const auto it = index_.find(page);
  if (it == index_.end()) return false;
  const auto [qid, pos] = it->second;
  q_[qid][pos].valid = false;
  index_.erase(it);
  return true;
}

std::vector<PageId> CopaQueues::valid_pages(int qid) const {
  std::vector<PageId> out;
  for (const Slot& s : q_[check_qid(qid)]) {
    if (s.valid) out.push_back(s.page);
  }
  return out;
}

std::uint64_t CopaQueues::drain(int qid, const std::function<void(PageId)>& fn) {
  check_qid(qid);
  std::vector<Slot> drained;
  drained.swap(q_[qid]);  // callbacks may insert into either queue
  for (const Slot& s : drained) {
    if (!s.valid) continue;
    index_.erase(s.page);
    fn(s.page);
  }
  return drained.size();
}

void CopaQueues::check_consistent() const {
  std::size_t valid_slots = 0;
  for (int qid = 0; qid < 2; ++qid) {
    for (std::size_t pos = 0; pos < q_[qid].size(); ++pos) {
      const Slot& s = q_[qid][pos];
      if (!s.valid) continue;
      ++valid_slots;
      const auto it = index_.find(s.page);
      NVB_CHECK(it != index_.end(), "valid slot missing from index");
      NVB_CHECK(it->second == std::make_pair(qid, pos), "index points at wrong slot");
    }
  }
  NVB_CHECK(valid_slots == index_.size(), "index size does not match valid slots");
}

TimerReport BaselineScheme::on_timer(NvbBuffer& buf, double now) {
  TimerReport rep;
  rep.at_s = now;
  for (const auto& [page, last_write_s] : buf.snapshot_dirty_set()) {
    if (now - last_write_s >= idle_threshold_s_) {
      rep.work.absorb(buf.flush_page(page, now));
      ++rep.pages_flushed;
    }
  }
  return rep;
}

TimerReport ConvScheme::on_timer(NvbBuffer& buf, double now) {
  TimerReport rep;
  rep.at_s = now;
  for (PageId page : buf.pja_pages_lru()) {
    rep.work.absorb(buf.refresh_page(page, now));
    ++rep.pages_refreshed;
  }
  rep.entries_scanned = rep.pages_refreshed;
  return rep;
}

void CopaScheme::note_pja_write(PageId page) {
  queues_.insert(counter_.dc() ? awake_qid() : sleepy_qid(), page);
}

void CopaScheme::note_dirty_eviction(PageId page) { queues_.invalidate(page); }

TimerReport CopaScheme::on_timer(NvbBuffer& buf, double now) {
  TimerReport rep;
  rep.at_s = now;
  if (counter_.dc()) {
    const int sleepy = sleepy_qid();
    const int awake = awake_qid();  // becomes sleepy after the increment
    rep.entries_scanned = queues_.drain(sleepy, [&](PageId page) {
      const AccessOutcome out = buf.refresh_page(page, now);
      if (out.pja_writes == 0) return;  // stale entry, page left the journal
      rep.work.absorb(out);
      ++rep.pages_refreshed;
      if (requeue_) queues_.insert(awake, page);
    });
  }
  counter_.advance();
  return rep;
}

void CopaScheme::check_consistent(const NvbBuffer& buf) const {
  queues_.check_consistent();
  NVB_CHECK(queues_.valid_count() == buf.pja_size(),
            "tracked entries do not match journal residency");
  for (PageId page : buf.pja_pages_lru()) {
    NVB_CHECK(queues_.has_valid_entry(page), "journal page missing a queue entry");
  }
}

std::unique_ptr<Scheme> make_scheme(const SchemeConfig& config) {
  config.validate();
  switch (config.kind) {
    case SchemeKind::kNoPdflush: return nullptr;
    case SchemeKind::kBaseline:
      return std::make_unique<BaselineScheme>(config.pdflush_idle_threshold_s);
    case SchemeKind::kConvScheme: return std::make_unique<ConvScheme>();
    case SchemeKind::kCopa: return std::make_unique<CopaScheme>(config.copa_requeue);
  }
  throw InternalError("unknown scheme kind");
}

}  // namespace nvbsim
