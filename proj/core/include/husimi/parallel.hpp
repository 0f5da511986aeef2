// Copyright 2026 The husimi-flow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace husimi {

/// Worker count used when the caller passes 0.
inline int default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs body(begin, end) over [0, count) split into contiguous chunks.
///
/// Each index is visited exactly once and the body must only write to slots
/// owned by its indices; the output is then independent of `threads`. The
/// first exception thrown by any worker is rethrown on the calling thread.
template <typename Body>
void parallel_for(std::size_t count, int threads, Body&& body) {
  if (threads <= 0) threads = default_threads();
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads), std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    body(std::size_t{0}, count);
    return;
  }
  // Small chunks handed out round-robin keep the load balanced when cell
  // cost varies across the grid.
  const std::size_t chunk = std::max<std::size_t>(1, count / (workers * 8));
  const std::size_t nchunks = (count + chunk - 1) / chunk;
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t c = w; c < nchunks; c += workers) {
            const std::size_t begin = c * chunk;
            body(begin, std::min(count, begin + chunk));
          }
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace husimi
