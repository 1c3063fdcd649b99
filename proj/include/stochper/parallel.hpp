#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace stochper {

/// Runs body(i) for i in [0, count) on `threads` workers, worker w taking
/// i = w, w + threads, ... Callers write results by index, so the outcome
/// does not depend on the worker count. Rethrows the first exception.
template <class Fn>
void parallel_for(long count, int threads, Fn&& body) {
  const int workers = static_cast<int>(std::max(1L, std::min<long>(std::max(1, threads), count)));
  if (workers == 1) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (long i = w; i < count; i += workers) body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace stochper
