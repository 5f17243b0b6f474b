#pragma once

#include <cstddef>
#include <functional>

namespace fieldtail {

// Worker count: FIELDTAIL_THREADS if set and positive, otherwise the
// hardware concurrency (at least 1). set_thread_count overrides both.
std::size_t thread_count();
void set_thread_count(std::size_t n);

// Runs body(i) for i in [0, n). Each index writes only its own output slot,
// so results are independent of scheduling. If any body throws, the
// exception from the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace fieldtail
