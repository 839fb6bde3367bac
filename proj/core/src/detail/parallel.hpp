#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <future>
#include <thread>
#include <vector>

namespace nbody::detail {

// Worker cap: min(hardware threads, NBODY_THREADS when set). Never below 1.
inline int workerCount() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("NBODY_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

// Runs fn(i) for i in [0, count), possibly concurrently. Indices are
// independent; results must land in per-index slots so merging stays
// deterministic regardless of scheduling.
inline void parallelForIndex(int count, const std::function<void(int)>& fn) {
  const int workers = std::min(workerCount(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::future<void>> futures;
  futures.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, [&, w]() {
      for (int i = w; i < count; i += workers) fn(i);
    }));
  }
  for (auto& f : futures) f.get();
}

}  // namespace nbody::detail
