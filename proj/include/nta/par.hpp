#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nta {

// Runtime switch for the OpenMP kernels. Tests flip this off to compare the
// parallel paths against their serial references; the CLI leaves it on.
inline bool& parallel_flag() {
    static bool on = true;
    return on;
}
inline bool parallel_enabled() { return parallel_flag(); }
inline void set_parallel(bool on) { parallel_flag() = on; }

// Parallel loop over [0, n). The body must only write to disjoint locations
// per index so results are deterministic regardless of scheduling.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
#ifdef _OPENMP
    if (parallel_enabled()) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(n); ++i)
            fn(static_cast<std::size_t>(i));
        return;
    }
#endif
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace nta
