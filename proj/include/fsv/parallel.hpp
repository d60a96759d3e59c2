#pragma once

#include <cstddef>
#include <functional>

namespace fsv {

// Worker count: FSV_THREADS if set and positive, else the hardware concurrency.
int thread_count();

// Runs body(i) for i in [0, count) on up to thread_count() threads. Items are
// claimed dynamically; body must only write state owned by item i.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace fsv
