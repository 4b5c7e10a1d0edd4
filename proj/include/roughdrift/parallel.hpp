#pragma once

#include <cstddef>
#include <functional>

namespace roughdrift {

/// Global cap on worker threads. 0 means hardware concurrency.
void set_worker_count(std::size_t workers);
std::size_t worker_count();

/// Runs body(i) for i in [0, n). Each index is processed exactly once and
/// bodies must only write to index-owned storage, so results never depend on
/// the worker count. The first exception (lowest chunk) is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace roughdrift
