#pragma once

namespace sparseview {

// Process-wide tuning for training workloads. Raises the allocator's mmap and
// trim thresholds so the large per-step activation buffers are recycled from
// the heap instead of being faulted in from the OS on every step. Call once
// from main(); has no effect on results.
void configure_runtime();

}  // namespace sparseview
