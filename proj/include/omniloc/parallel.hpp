#pragma once

#include <cstdint>
#include <functional>

namespace omniloc {

/// Number of worker threads data-parallel loops may use. Defaults to 1.
int max_threads();

/// Sets the global worker-thread cap. Values below 1 clamp to 1.
void set_max_threads(int n);

/// Runs fn(0) .. fn(n_blocks-1), possibly concurrently across the configured
/// thread pool. Blocks must be independent; callers combine per-block results
/// sequentially afterwards so numeric output never depends on the thread
/// count. Nested calls from inside a block run inline.
void parallel_blocks(std::int64_t n_blocks, const std::function<void(std::int64_t)>& fn);

/// Fixed block length used when slicing per-point loops. Part of the numeric
/// contract: partial sums are always accumulated over these exact ranges.
inline constexpr std::int64_t kPointBlockSize = 16384;

}  // namespace omniloc
