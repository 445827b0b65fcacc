// Copyright 2026 The LQE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

#include "lqe/common.hpp"

namespace lqe {

/// Pixel rows per work item. Partial sums are formed per block, so results do
/// not depend on the number of threads.
inline constexpr Index kPixelBlock = 256;

/// Runs fn(i) for i in [0, n). Work is split into contiguous chunks, one per
/// thread; threads <= 1 runs inline.
template <typename Fn>
void parallel_for(Index n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  const Index workers = std::min<Index>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (Index w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const Index begin = n * w / workers;
      const Index end = n * (w + 1) / workers;
      try {
        for (Index i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Pairwise (tree) reduction in a fixed order: neighbours are summed level by
/// level. The summation tree depends only on parts.size().
template <typename T>
T pairwise_sum(std::vector<T> parts) {
  if (parts.empty()) return T{};
  while (parts.size() > 1) {
    std::vector<T> next;
    next.reserve((parts.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2) next.push_back(parts[i] + parts[i + 1]);
    if (parts.size() % 2 == 1) next.push_back(std::move(parts.back()));
    parts = std::move(next);
  }
  return std::move(parts.front());
}

}  // namespace lqe
