#ifndef REEBCONE_SRC_PARALLEL_HPP
#define REEBCONE_SRC_PARALLEL_HPP

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace reebcone::detail {

// Runs fn(i) for i in [0, count) on up to `threads` workers using a static
// interleaved schedule. Results must be written to per-index slots; callers
// reduce them in index order afterwards, so output never depends on timing.
template <class Fn>
void parallel_for_index(std::size_t count, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
      workers.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < count; i += threads) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace reebcone::detail

#endif  // REEBCONE_SRC_PARALLEL_HPP
