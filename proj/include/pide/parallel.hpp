#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace pide {

int default_threads();
void set_default_threads(int n);

// Runs fn(chunk_index, begin, end) over [0, n) split into fixed-size chunks.
// Chunk boundaries depend only on (n, chunk); threads pull chunks dynamically,
// so the set of per-chunk results is identical for any thread count. Callers
// merge the chunk results in chunk order to keep reductions bit-exact.
void for_each_chunk(std::size_t n, std::size_t chunk, int threads,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

// Deterministic sum of fn(i) over [0, n): per-chunk plain sums merged in chunk
// order with Neumaier compensation.
double parallel_sum(std::size_t n, int threads, const std::function<double(std::size_t)>& fn);

// Same but fn returns a fixed-width vector accumulated component-wise.
std::vector<double> parallel_sum_vec(std::size_t n, std::size_t width, int threads,
                                     const std::function<void(std::size_t, std::vector<double>&)>& fn);

inline constexpr std::size_t kDefaultChunk = 1024;

}  // namespace pide
