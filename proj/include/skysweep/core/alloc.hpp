#pragma once

#include <atomic>
#include <cstdint>

namespace skysweep {

// Process-wide accounting of live tensor buffer bytes. Every tensor
// allocation bumps `live` and folds it into `peak`; every release decrements
// `live`. `peak` is monotone until reset_peak_tensor_bytes() rebases it to
// the current live count, which opens a new measurement window.
namespace detail {

struct MemCounters {
  std::atomic<std::int64_t> live{0};
  std::atomic<std::int64_t> peak{0};
};

inline MemCounters& mem_counters() {
  static MemCounters counters;
  return counters;
}

inline void count_alloc(std::int64_t bytes) {
  auto& c = mem_counters();
  const std::int64_t now = c.live.fetch_add(bytes, std::memory_order_relaxed) + bytes;
  std::int64_t prev = c.peak.load(std::memory_order_relaxed);
  while (prev < now && !c.peak.compare_exchange_weak(prev, now, std::memory_order_relaxed)) {
  }
}

inline void count_free(std::int64_t bytes) {
  mem_counters().live.fetch_sub(bytes, std::memory_order_relaxed);
}

}  // namespace detail

inline std::int64_t live_tensor_bytes() {
  return detail::mem_counters().live.load(std::memory_order_relaxed);
}

inline std::int64_t peak_tensor_bytes() {
  return detail::mem_counters().peak.load(std::memory_order_relaxed);
}

inline void reset_peak_tensor_bytes() {
  auto& c = detail::mem_counters();
  c.peak.store(c.live.load(std::memory_order_relaxed), std::memory_order_relaxed);
}

}  // namespace skysweep
