// Copyright 2026 The plastiq Authors
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
#include <thread>
#include <vector>

namespace plastiq {

/// Runs fn(begin, end) over contiguous chunks of [0, n). Each index is
/// visited by exactly one worker, so per-index writes are race free and the
/// result does not depend on the worker count.
template <typename Fn>
void parallel_for(int n, int workers, Fn&& fn) {
  constexpr int kMinChunk = 2048;
  workers = std::clamp(workers, 1, std::max(1, n / kMinChunk));
  if (workers <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  const int chunk = (n + workers - 1) / workers;
  for (int w = 1; w < workers; ++w) {
    const int b = w * chunk;
    const int e = std::min(n, b + chunk);
    if (b < e) pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  fn(0, std::min(n, chunk));
  for (auto& t : pool) t.join();
}

}  // namespace plastiq
