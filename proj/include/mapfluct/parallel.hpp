#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mapfluct {

// Worker count used when callers pass 0.
int default_workers();
void set_default_workers(int n);

// Splits [0, n) into fixed chunks, runs body(begin, end, acc) on a pool and
// merges the per-chunk accumulators in chunk order. Results depend only on
// (n, chunk), never on the worker count.
template <class Acc, class Make, class Body, class Merge>
Acc chunked_reduce(std::size_t n, std::size_t chunk, int workers, Make make, Body body, Merge merge) {
  if (chunk == 0) chunk = 1;
  const std::size_t n_chunks = (n + chunk - 1) / chunk;
  std::vector<Acc> parts;
  parts.reserve(n_chunks);
  for (std::size_t c = 0; c < n_chunks; ++c) parts.push_back(make());
  if (workers <= 0) workers = default_workers();
  workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), std::max<std::size_t>(n_chunks, 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto run = [&]() {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) break;
      const std::size_t b = c * chunk;
      try {
        body(b, std::min(n, b + chunk), parts[c]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next.store(n_chunks);
      }
    }
  };
  if (workers <= 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  Acc total = make();
  for (auto& p : parts) merge(total, p);
  return total;
}

}  // namespace mapfluct
