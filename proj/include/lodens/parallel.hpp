#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lodens {

//! Runs fn(i) for i in [0, count) on up to `threads` workers. Work items
//! must write only to their own slot; the first exception (lowest index) is
//! rethrown after all workers have joined.
template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& fn)
{
  if (count == 0)
    return;
  const unsigned workers = static_cast<unsigned>(
    std::min<std::size_t>(std::max(1u, threads), count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i)
      fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr err;
  std::size_t err_index = count;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count)
        return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(err_mutex);
        if (i < err_index) {
          err_index = i;
          err = std::current_exception();
        }
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w)
    pool.emplace_back(body);
  body();
  pool.clear();
  if (err)
    std::rethrow_exception(err);
}

} // namespace lodens
