#pragma once

#include <cstddef>
#include <functional>

namespace qconv {

/// Worker count used by parallel_for. Defaults to $QCONV_THREADS when set,
/// otherwise std::thread::hardware_concurrency().
std::size_t parallelism();

/// 0 restores the default.
void set_parallelism(std::size_t threads);

/// Runs body(i) for i in [0, count). Calls made from inside a worker run
/// serially, so nesting is safe. The first exception thrown is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)> &body);

} // namespace qconv
