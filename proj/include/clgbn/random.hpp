#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace clgbn {

using Rng = std::mt19937_64;

/// Independent generator for replicate/fold/query `index` derived from a master seed.
/// Parallel and serial callers obtain identical streams.
Rng substream(std::uint64_t master_seed, std::uint64_t index);

/// Runs body(i) for i in [0, count) on up to `threads` workers (0 = hardware concurrency).
/// Exceptions thrown by body are rethrown on the calling thread (first by index).
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace clgbn
