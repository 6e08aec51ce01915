#pragma once

#include <cstddef>
#include <functional>

namespace smallball {

// Worker cap from SMALLBALL_VI_THREADS; absent or invalid means 1
// (single-threaded). Read fresh on every call so tests can toggle it.
std::size_t max_workers();

// Splits [0, total) into contiguous chunks of at most chunk_size and runs
// fn(chunk_index, begin, end) for each, possibly on several threads.
// Callers make chunks independent (per-index sample generation) and reduce
// per-chunk results in chunk order, which keeps every reduction
// deterministic for any worker count.
void for_chunks(std::size_t total, std::size_t chunk_size,
                const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace smallball
