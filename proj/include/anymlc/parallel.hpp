#ifndef ANYMLC_PARALLEL_HPP_
#define ANYMLC_PARALLEL_HPP_

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace anymlc {

// Runs fn(begin, end) over contiguous chunks of [0, n). Workers must write
// only to disjoint, preallocated slots; any reduction happens afterwards in
// index order so results are identical for every thread count.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n < 2) {
    fn(std::size_t{0}, n);
    return;
  }
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, w, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace anymlc

#endif  // ANYMLC_PARALLEL_HPP_
