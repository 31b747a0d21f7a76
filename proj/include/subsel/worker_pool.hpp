#pragma once

#include <cstddef>
#include <functional>

namespace subsel {

/// Runs index-parallel loops on a fixed number of workers. Each index is
/// processed exactly once and callers write results by index, so the output
/// does not depend on the worker count.
class WorkerPool {
  public:
    explicit WorkerPool(std::size_t workers = 1) : workers_(workers == 0 ? 1 : workers) {}

    std::size_t workers() const noexcept { return workers_; }

    /// Calls fn(i) for i in [0, n). If any call throws, the exception from the
    /// smallest failing index is rethrown after all workers finish.
    void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) const;

  private:
    std::size_t workers_;
};

} // namespace subsel
