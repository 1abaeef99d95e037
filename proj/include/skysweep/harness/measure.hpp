#pragma once

#include <chrono>
#include <cstdint>

#include "skysweep/core/alloc.hpp"
#include "skysweep/core/tape.hpp"
#include "skysweep/net/rednet.hpp"

namespace skysweep {

template <typename T>
struct RunMeasurement {
  std::int64_t peak_bytes = 0;       // peak live tensor bytes above the pre-run baseline
  std::int64_t volume_bytes = 0;     // the stacked D,H,W output itself
  std::int64_t working_bytes = 0;    // peak_bytes minus the output volume
  double wall_seconds = 0;
  Tensor<T> volume;                  // probability volume, kept for inspection
  DepthPlan plan;
};

// Runs one inference forward pass inside a fresh allocator window and reports
// peak live tensor bytes above the entry baseline plus wall time. The output
// volume is D-proportional by definition, so working_bytes subtracts it; that
// remainder is what the memory-constancy property constrains.
template <typename T>
RunMeasurement<T> measure_run(const UnitInputs<T>& unit, const DepthPlan& plan,
                              RedNetParams<T>& net) {
  const std::int64_t live0 = live_tensor_bytes();
  reset_peak_tensor_bytes();
  const auto t0 = std::chrono::steady_clock::now();

  Tape<T> tape(false);
  Var<T> volume = forward_volume(tape, unit, plan, net);

  const auto t1 = std::chrono::steady_clock::now();
  RunMeasurement<T> m;
  m.peak_bytes = peak_tensor_bytes() - live0;
  m.volume_bytes = volume.value.numel() * static_cast<std::int64_t>(sizeof(T));
  m.working_bytes = m.peak_bytes - m.volume_bytes;
  m.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  m.volume = volume.value;
  m.plan = plan;
  return m;
}

}  // namespace skysweep
