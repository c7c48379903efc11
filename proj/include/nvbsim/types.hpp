#pragma once

#include <compare>
#include <cstdint>
#include <functional>

namespace nvbsim {

enum class AccessKind : std::uint8_t { kRead, kWrite };

// Identifies a 4 KB-class page across disks. Disk id lives in the top 16
// bits so page indexes up to 2^48 pages per disk stay collision free.
class PageId {
 public:
  static constexpr int kDiskShift = 48;
  static constexpr std::uint64_t kIndexMask = (std::uint64_t{1} << kDiskShift) - 1;

  constexpr PageId() = default;
  constexpr PageId(std::uint32_t disk, std::uint64_t index)
      : raw_((std::uint64_t{disk} << kDiskShift) | (index & kIndexMask)) {}

  static constexpr PageId from_raw(std::uint64_t raw) {
    PageId p;
    p.raw_ = raw;
    return p;
  }

  constexpr std::uint64_t raw() const { return raw_; }
  constexpr std::uint32_t disk() const { return static_cast<std::uint32_t>(raw_ >> kDiskShift); }
  constexpr std::uint64_t index() const { return raw_ & kIndexMask; }

  constexpr auto operator<=>(const PageId&) const = default;

 private:
  std::uint64_t raw_ = 0;
};

// One block-level request as recorded in an MSRC-style trace line.
struct Request {
  double timestamp_s = 0.0;  // seconds since the first record of the trace
  std::uint32_t disk = 0;
  AccessKind kind = AccessKind::kRead;
  std::uint64_t offset_bytes = 0;
  std::uint64_t size_bytes = 0;
  std::uint64_t response_time_us = 0;
};

// A request expanded onto a single page. The unit the buffers operate on.
struct PageAccess {
  double timestamp_s = 0.0;
  PageId page;
  AccessKind kind = AccessKind::kRead;
};

}  // namespace nvbsim

template <>
struct std::hash<nvbsim::PageId> {
  std::size_t operator()(const nvbsim::PageId& p) const noexcept {
    return std::hash<std::uint64_t>{}(p.raw());
  }
};
