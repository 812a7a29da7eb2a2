#pragma once

// Deterministic Monte Carlo farming.
//
// Sample indices 0..samples-1 are cut into a fixed number of contiguous
// chunks that depends only on `samples`. Each chunk folds its samples into a
// private accumulator in index order; chunk accumulators are then merged in
// chunk order. Workers only decide which thread runs a chunk, so the result
// is identical for every worker count, including the serial runner.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <vector>

#include <omp.h>

#include "vibra/linalg.hpp"

namespace vibra {

inline constexpr std::uint64_t kMaxChunks = 256;

inline std::uint64_t chunk_count(std::uint64_t samples) { return std::min(samples, kMaxChunks); }

inline std::uint64_t chunk_begin(std::uint64_t chunk, std::uint64_t samples) {
  return chunk * samples / chunk_count(samples);
}

struct FarmProgress {
  const char* label = nullptr;  // null disables reporting
};

namespace detail {

template <class Acc, class Make, class Work>
void run_chunk(std::uint64_t c, std::uint64_t samples, Acc& acc, Make& make, Work& work) {
  acc = make();
  const std::uint64_t end = chunk_begin(c + 1, samples);
  for (std::uint64_t i = chunk_begin(c, samples); i < end; ++i) work(acc, i);
}

inline void report(const FarmProgress& p, std::uint64_t done, std::uint64_t total) {
  if (p.label == nullptr || total == 0) return;
  const std::uint64_t step = std::max<std::uint64_t>(1, total / 10);
  if (done % step == 0 || done == total) {
    std::fprintf(stderr, "[%s] %llu/%llu chunks\n", p.label, static_cast<unsigned long long>(done),
                 static_cast<unsigned long long>(total));
  }
}

}  // namespace detail

/// Reference runner: one thread, same chunking and merge order.
template <class Acc, class Make, class Work>
Acc farm_serial(std::uint64_t samples, Make make, Work work, FarmProgress progress = {}) {
  const std::uint64_t chunks = chunk_count(samples);
  Acc total = make();
  for (std::uint64_t c = 0; c < chunks; ++c) {
    Acc acc;
    detail::run_chunk(c, samples, acc, make, work);
    total.merge(acc);
    detail::report(progress, c + 1, chunks);
  }
  return total;
}

/// OpenMP runner. BLAS is pinned to one thread per worker for the duration.
template <class Acc, class Make, class Work>
Acc farm(std::uint64_t samples, int workers, Make make, Work work, FarmProgress progress = {}) {
  const std::uint64_t chunks = chunk_count(samples);
  std::vector<Acc> parts(chunks);
  std::vector<std::exception_ptr> errors(chunks);
  std::atomic<std::uint64_t> done{0};
  {
    linalg::BlasThreadScope blas(1);
    const auto n = static_cast<std::int64_t>(chunks);
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(workers, 1))
    for (std::int64_t c = 0; c < n; ++c) {
      try {
        detail::run_chunk(static_cast<std::uint64_t>(c), samples, parts[static_cast<std::size_t>(c)], make, work);
      } catch (...) {
        errors[static_cast<std::size_t>(c)] = std::current_exception();
      }
      const std::uint64_t d = ++done;
#pragma omp critical(vibra_farm_progress)
      detail::report(progress, d, chunks);
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  Acc total = make();
  for (auto& p : parts) total.merge(p);
  return total;
}

}  // namespace vibra
