#pragma once

#include <cstddef>
#include <functional>

namespace srasym {

/// Number of workers: hardware concurrency capped by SRASYM_THREADS (re-read
/// on every call so tests can change it between runs).
unsigned worker_count();

/// Runs fn(i) for i in [0, n) across workers. Work items must be independent;
/// callers aggregate into per-index storage so results are identical under any
/// partitioning.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace srasym
