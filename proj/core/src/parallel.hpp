#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace vortexlab::detail {

// Runs fn(i) for i in [0, count) on a small pool; results are written by index so the
// outcome does not depend on scheduling. The first failure (by index) is rethrown.
template <class F>
void parallel_for(int count, int threads, F&& fn) {
  std::vector<std::exception_ptr> errs(static_cast<size_t>(count));
  threads = std::max(1, std::min(threads, count));
  auto run = [&](int first, int stride) {
    for (int i = first; i < count; i += stride) {
      try {
        fn(i);
      } catch (...) {
        errs[static_cast<size_t>(i)] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    run(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(run, w, threads);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

}  // namespace vortexlab::detail
