#pragma once

#include <functional>

#include <matcol/types.hpp>

namespace matcol {

// Worker count from MATCOL_JOBS when set, otherwise hardware concurrency.
int default_jobs();

// Runs body(i) for i in [0, count) on up to `jobs` threads. Work items are
// independent; callers own result placement, so assembly is deterministic
// regardless of scheduling. If bodies throw, the exception from the smallest
// index is rethrown after all workers finish.
void parallel_for(Index count, int jobs, const std::function<void(Index)>& body);

}  // namespace matcol
