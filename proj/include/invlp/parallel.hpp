#pragma once

#include <Eigen/Core>
#include <functional>

namespace invlp {

/// Worker cap: INVLP_THREADS when set (>=1), else hardware concurrency.
int max_threads();

/// Runs fn(i) for i in [0, n). Work items must be independent; results are
/// deterministic regardless of scheduling. Exceptions are rethrown on the
/// calling thread.
void parallel_for(Eigen::Index n, const std::function<void(Eigen::Index)>& fn);

}  // namespace invlp
