#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <thread>
#include <vector>

namespace kbte {

/// Worker count resolution: explicit flag, then KINETIC_BTE_WORKERS, then 1.
int resolve_workers(std::optional<int> requested);

void set_default_workers(int workers);
int default_workers();

/// Runs body(begin, end) over a fixed contiguous partition of [0, n).
/// The partition depends only on (n, workers), so any reduction the caller
/// performs per chunk and then combines in chunk order is reproducible.
template <typename Body>
void parallel_for(std::size_t n, int workers, Body&& body) {
  if (n == 0) return;
  const std::size_t chunks =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (chunks == 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(chunks - 1);
  const std::size_t base = n / chunks;
  const std::size_t extra = n % chunks;
  std::size_t begin = 0;
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t len = base + (c < extra ? 1 : 0);
    ranges.emplace_back(begin, begin + len);
    begin += len;
  }
  for (std::size_t c = 1; c < chunks; ++c) {
    pool.emplace_back([&body, r = ranges[c]] { body(r.first, r.second); });
  }
  body(ranges[0].first, ranges[0].second);
  for (auto& t : pool) t.join();
}

template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  parallel_for(n, default_workers(), std::forward<Body>(body));
}

}  // namespace kbte
