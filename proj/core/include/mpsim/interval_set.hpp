#pragma once

#include <cstdint>
#include <map>

namespace mpsim {

// Disjoint half-open byte ranges [begin, end). Used by the receiver to
// dedupe reinjected data and to compute cumulative acknowledgment points.
class IntervalSet {
 public:
  // Inserts [begin, end); returns how many bytes were newly covered.
  uint64_t insert(uint64_t begin, uint64_t end) {
    if (begin >= end) return 0;
    uint64_t requested = end - begin;
    uint64_t overlap = 0;

    // First candidate: the run starting at or before `begin`.
    auto it = runs_.upper_bound(begin);
    if (it != runs_.begin()) {
      auto prev = std::prev(it);
      if (prev->second >= begin) it = prev;
    }
    uint64_t merged_begin = begin;
    uint64_t merged_end = end;
    while (it != runs_.end() && it->first <= merged_end) {
      uint64_t lo = std::max(it->first, begin);
      uint64_t hi = std::min(it->second, end);
      if (hi > lo) overlap += hi - lo;
      merged_begin = std::min(merged_begin, it->first);
      merged_end = std::max(merged_end, it->second);
      it = runs_.erase(it);
    }
    runs_.emplace(merged_begin, merged_end);
    total_ += requested - overlap;
    return requested - overlap;
  }

  bool contains(uint64_t begin, uint64_t end) const {
    if (begin >= end) return true;
    auto it = runs_.upper_bound(begin);
    if (it == runs_.begin()) return false;
    --it;
    return it->first <= begin && it->second >= end;
  }

  // End of the contiguous coverage starting at byte 0 (0 if byte 0 missing).
  uint64_t prefix_end() const {
    auto it = runs_.find(0);
    return it == runs_.end() ? 0 : it->second;
  }

  uint64_t total() const { return total_; }
  bool empty() const { return runs_.empty(); }

 private:
  std::map<uint64_t, uint64_t> runs_;
  uint64_t total_ = 0;
};

}  // namespace mpsim
