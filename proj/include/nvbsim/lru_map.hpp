#pragma once

#include <cstddef>
#include <list>
#include <unordered_map>
#include <vector>

#include "nvbsim/errors.hpp"
#include "nvbsim/types.hpp"

namespace nvbsim {

// Page-keyed map with LRU ordering. Front of the list is the eviction
// candidate; every touch moves an entry to the back, so equal-recency ties
// resolve to insertion order by construction.
template <typename V>
class LruMap {
 public:
  bool contains(PageId page) const { return pos_.contains(page); }
  std::size_t size() const { return order_.size(); }
  bool empty() const { return order_.empty(); }

  // Lookup without a recency change.
  V* find(PageId page) {
    auto it = pos_.find(page);
    return it == pos_.end() ? nullptr : &it->second->second;
  }
  const V* find(PageId page) const {
    auto it = pos_.find(page);
    return it == pos_.end() ? nullptr : &it->second->second;
  }

  // Lookup that marks the entry most recently used.
  V* touch(PageId page) {
    auto it = pos_.find(page);
    if (it == pos_.end()) return nullptr;
    order_.splice(order_.end(), order_, it->second);
    return &it->second->second;
  }

  V& insert_mru(PageId page, V value) {
    NVB_CHECK(!contains(page), "duplicate LRU insertion");
    order_.emplace_back(page, std::move(value));
    pos_[page] = std::prev(order_.end());
    return order_.back().second;
  }

  PageId lru_page() const {
    NVB_CHECK(!order_.empty(), "LRU peek on empty map");
    return order_.front().first;
  }

  std::pair<PageId, V> evict_lru() {
    NVB_CHECK(!order_.empty(), "LRU eviction on empty map");
    auto entry = std::move(order_.front());
    pos_.erase(entry.first);
    order_.pop_front();
    return entry;
  }

  void erase(PageId page) {
    auto it = pos_.find(page);
    NVB_CHECK(it != pos_.end(), "erase of absent LRU entry");
    order_.erase(it->second);
    pos_.erase(it);
  }

  // Pages in LRU-to-MRU order.
  std::vector<PageId> pages() const {
    std::vector<PageId> out;
    out.reserve(order_.size());
    for (const auto& [page, value] : order_) out.push_back(page);
    return out;
  }

 private:
  std::list<std::pair<PageId, V>> order_;
  std::unordered_map<PageId, typename std::list<std::pair<PageId, V>>::iterator> pos_;
};

}  // namespace nvbsim
