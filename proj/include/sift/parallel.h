#ifndef SIFT_PARALLEL_H_
#define SIFT_PARALLEL_H_

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace sift {

// Splits [0, n) into at most |jobs| contiguous chunks and runs
// fn(chunk_index, begin, end) for each, on worker threads when jobs > 1.
// The first exception thrown by any chunk is rethrown after all join.
template <typename Fn>
void ParallelChunks(std::size_t n, unsigned jobs, Fn&& fn) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(jobs, n));
  const std::size_t step = (n + workers - 1) / std::max<std::size_t>(1, workers);
  if (workers == 1) {
    fn(std::size_t{0}, std::size_t{0}, n);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t begin = std::min(n, w * step);
    std::size_t end = std::min(n, begin + step);
    threads.emplace_back([&, w, begin, end] {
      try {
        fn(w, begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads)
    t.join();
  for (auto& e : errors) {
    if (e)
      std::rethrow_exception(e);
  }
}

inline std::size_t ChunkCount(std::size_t n, unsigned jobs) {
  return std::max<std::size_t>(1, std::min<std::size_t>(jobs, n));
}

}  // namespace sift

#endif  // SIFT_PARALLEL_H_
