#pragma once

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pax {

// Every hot kernel in this library comes in two flavors: a serial reference
// and an OpenMP version. Results are bit-identical between the two because
// parallel loops only ever split work along independent axes (features,
// rows) and reductions run over a fixed chunk grid folded in index order.
enum class ExecMode { Serial, Parallel };

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace detail {
constexpr std::size_t kReduceChunk = 4096;
}

// Deterministic sum of fn(i) for i in [0, n): partials are accumulated per
// fixed-size chunk and folded in chunk order, so the result does not depend
// on the thread count.
template <typename Fn>
double chunked_sum(std::size_t n, ExecMode mode, Fn&& fn) {
    if (n == 0) return 0.0;
    const std::size_t n_chunks = (n + detail::kReduceChunk - 1) / detail::kReduceChunk;
    std::vector<double> partial(n_chunks, 0.0);
    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(n_chunks); ++c) {
            const std::size_t lo = static_cast<std::size_t>(c) * detail::kReduceChunk;
            const std::size_t hi = std::min(n, lo + detail::kReduceChunk);
            double acc = 0.0;
            for (std::size_t i = lo; i < hi; ++i) acc += fn(i);
            partial[static_cast<std::size_t>(c)] = acc;
        }
    } else {
        for (std::size_t c = 0; c < n_chunks; ++c) {
            const std::size_t lo = c * detail::kReduceChunk;
            const std::size_t hi = std::min(n, lo + detail::kReduceChunk);
            double acc = 0.0;
            for (std::size_t i = lo; i < hi; ++i) acc += fn(i);
            partial[c] = acc;
        }
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

// Runs fn(i) for i in [0, n); iterations must be independent.
template <typename Fn>
void parallel_for(std::size_t n, ExecMode mode, Fn&& fn) {
    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
            fn(static_cast<std::size_t>(i));
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) fn(i);
    }
}

}  // namespace pax
