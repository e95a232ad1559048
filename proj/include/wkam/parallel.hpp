#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace wkam {

// Global worker count. Affects wall time only: every parallel_for body
// writes disjoint outputs and all reductions run serially afterwards, so
// results are bitwise independent of the schedule.
inline int& thread_count() {
  static int n = 1;
  return n;
}

template <typename Body>
void parallel_for(std::size_t begin, std::size_t end, const Body& body) {
  const std::size_t total = end > begin ? end - begin : 0;
  const int nt = std::max(1, thread_count());
  if (nt == 1 || total < 2048) {
    for (std::size_t i = begin; i < end; ++i) body(i);
    return;
  }
  const std::size_t chunk = (total + nt - 1) / nt;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(nt));
  for (int t = 0; t < nt; ++t) {
    const std::size_t lo = begin + chunk * static_cast<std::size_t>(t);
    const std::size_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back([&body, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& w : workers) w.join();
}

}  // namespace wkam
