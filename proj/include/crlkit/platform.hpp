#pragma once

namespace crl {

/// Keeps large temporaries on the heap instead of fresh mmap pages. Training
/// allocates many megabyte-sized matrices per iteration; without this the
/// page faults cost about as much as the arithmetic. Call once from main.
void tune_allocator();

}  // namespace crl
