#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#else
inline int omp_get_max_threads() { return 1; }
inline int omp_get_thread_num() { return 0; }
#endif

namespace hotspot {

/// Execution mode for the batch kernels. Every parallel kernel has a serial
/// path that produces identical output; the serial path is the reference the
/// tests compare against.
enum class Exec { Serial, Parallel };

inline int max_threads(Exec mode) {
    return mode == Exec::Parallel ? omp_get_max_threads() : 1;
}

}  // namespace hotspot
