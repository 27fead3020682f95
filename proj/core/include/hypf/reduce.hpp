#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace hypf {

/// Number of worker threads used by the parallel helpers. Defaults to the
/// HYPF_THREADS environment variable, or 1 when unset.
int thread_count();
void set_thread_count(int n);

/// Fixed chunk length for reductions. Chunk boundaries never depend on the
/// thread count, so sums are bit-identical for any number of threads.
inline constexpr std::size_t kReductionChunk = 1024;

/// Runs body(begin, end) over [0, n) split into fixed chunks.
void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t)>& body);

/// Deterministic sum of term(i) for i in [0, n): per-chunk partial sums are
/// combined in chunk order.
double deterministic_sum(std::size_t n, const std::function<double(std::size_t)>& term);

/// Calls body(i) for every i in [0, n) using the worker pool. Order of calls
/// is unspecified; body must only write to slot i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace hypf
