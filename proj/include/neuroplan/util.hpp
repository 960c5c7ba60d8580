#pragma once

#include <functional>
#include <string>

namespace neuroplan {

// Worker-pool width: min(hardware, NEUROPLAN_THREADS when set), at least 1.
int worker_threads();

// Runs fn(i) for i in [0, n). Work is indexed, so parallel and serial
// execution produce identical results.
void parallel_for(int n, const std::function<void(int)>& fn);

} // namespace neuroplan
